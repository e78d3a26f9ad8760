//! Sparse SDPA (`.dat-s`) encoding of the factor-revealing SDP, its re-reader and the η sidecar.
//!
//! Layout: block 1 is `Q` (t×t), block 2 is `F` (t×t), block 3 is a diagonal LP block of size
//! `m + 2` holding `η_i ≥ 0`, `Σ η ≥ 1` and `−Σ η ≥ −1`. Values use Rust's shortest round-trip
//! float formatting, so writing a parsed file reproduces it byte for byte.

use std::fmt::Write as _;

use clusterlp_core::linalg::Matrix;
use clusterlp_core::sdp::{EtaEvaluation, RefineRule, SdpModel};
use serde::{Deserialize, Serialize};

use crate::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpaEntry {
    pub mat: usize,
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpaProblem {
    pub comment: String,
    /// Negative sizes are diagonal blocks.
    pub block_struct: Vec<i64>,
    pub c: Vec<f64>,
    /// Sorted by `(mat, block, i, j)`, `i ≤ j`, 1-based indices.
    pub entries: Vec<SdpaEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum SdpaError {
    #[error("model has no variables")]
    EmptyModel,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("eta has {got} entries, problem has {expected} variables")]
    Length { got: usize, expected: usize },
    #[error("eta[{index}] = {value} is negative or not finite")]
    Negative { index: usize, value: f64 },
}

impl SdpaProblem {
    pub fn from_model(model: &SdpModel) -> Result<Self, SdpaError> {
        let m = model.vars.len();
        if m == 0 {
            return Err(SdpaError::EmptyModel);
        }
        let t = model.dim();
        let mut entries = vec![
            SdpaEntry { mat: 0, block: 3, i: m + 1, j: m + 1, value: 1.0 },
            SdpaEntry { mat: 0, block: 3, i: m + 2, j: m + 2, value: -1.0 },
        ];
        for v in 0..m {
            let mat = v + 1;
            for (block, coefs) in [(1, model.q_coefficients(v)), (2, model.f_coefficients(v))] {
                entries.extend(coefs.into_iter().filter(|&(_, _, x)| x != 0.0).map(|(i, j, value)| SdpaEntry {
                    mat,
                    block,
                    i: i + 1,
                    j: j + 1,
                    value,
                }));
            }
            entries.push(SdpaEntry { mat, block: 3, i: mat, j: mat, value: 1.0 });
            entries.push(SdpaEntry { mat, block: 3, i: m + 1, j: m + 1, value: 1.0 });
            entries.push(SdpaEntry { mat, block: 3, i: m + 2, j: m + 2, value: -1.0 });
        }
        entries.sort_by_key(|e| (e.mat, e.block, e.i, e.j));
        Ok(SdpaProblem {
            comment: format!("factor-revealing SDP alpha={} rules={} t={t}", model.alpha, model.rules),
            block_struct: vec![t as i64, t as i64, -((m + 2) as i64)],
            c: model.vars.iter().map(|v| v.d_tilde).collect(),
            entries,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn to_sdpa_string(&self) -> String {
        let mut s = String::new();
        writeln!(s, "\"{}", self.comment).unwrap();
        writeln!(s, "{} = mDIM", self.c.len()).unwrap();
        writeln!(s, "{} = nBLOCK", self.block_struct.len()).unwrap();
        let bs: Vec<String> = self.block_struct.iter().map(i64::to_string).collect();
        writeln!(s, "{} = blockStruct", bs.join(" ")).unwrap();
        let cs: Vec<String> = self.c.iter().map(f64::to_string).collect();
        writeln!(s, "{}", cs.join(" ")).unwrap();
        for e in &self.entries {
            writeln!(s, "{} {} {} {} {}", e.mat, e.block, e.i, e.j, e.value).unwrap();
        }
        s
    }

    /// Reads the subset of SDPA sparse syntax this module writes, plus the usual `{ } , ( )` punctuation.
    pub fn parse(text: &str) -> Result<Self, SdpaError> {
        let mut comment = String::new();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| {
                if let Some(rest) = l.strip_prefix('"').or_else(|| l.strip_prefix('*')) {
                    if comment.is_empty() {
                        comment = rest.to_owned();
                    }
                    false
                } else {
                    !l.is_empty()
                }
            })
            .collect::<Vec<_>>()
            .into_iter();
        let syntax = |line: usize, message: String| SdpaError::Syntax { line, message };
        let numbers = |line: &str| -> Vec<String> {
            line.split(|c: char| c.is_whitespace() || "{},()".contains(c))
                .filter(|t| !t.is_empty())
                .take_while(|t| !t.starts_with('='))
                .map(str::to_owned)
                .collect()
        };
        let mut header = |what: &str| -> Result<(usize, Vec<String>), SdpaError> {
            let (ln, l) = lines.next().ok_or_else(|| syntax(0, format!("missing {what}")))?;
            Ok((ln, numbers(l)))
        };
        let (ln, toks) = header("mDIM")?;
        let m: usize = toks.first().and_then(|t| t.parse().ok()).ok_or_else(|| syntax(ln, "bad mDIM".into()))?;
        let (ln, toks) = header("nBLOCK")?;
        let nb: usize = toks.first().and_then(|t| t.parse().ok()).ok_or_else(|| syntax(ln, "bad nBLOCK".into()))?;
        let (ln, toks) = header("blockStruct")?;
        let block_struct: Vec<i64> = toks
            .iter()
            .take(nb)
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|e| syntax(ln, format!("blockStruct: {e}")))?;
        if block_struct.len() != nb {
            return Err(syntax(ln, format!("expected {nb} block sizes")));
        }
        let mut c = Vec::with_capacity(m);
        while c.len() < m {
            let (ln, l) = lines.next().ok_or_else(|| syntax(0, "objective vector truncated".into()))?;
            for t in numbers(l) {
                c.push(t.parse::<f64>().map_err(|e| syntax(ln, format!("objective: {e}")))?);
            }
        }
        if c.len() != m {
            return Err(syntax(0, format!("objective has {} values, mDIM = {m}", c.len())));
        }
        let mut entries = Vec::new();
        for (ln, l) in lines {
            let toks = numbers(l);
            if toks.len() != 5 {
                return Err(syntax(ln, format!("expected 5 fields, found {}", toks.len())));
            }
            let idx = |k: usize| toks[k].parse::<usize>().map_err(|e| syntax(ln, format!("field {}: {e}", k + 1)));
            let e = SdpaEntry {
                mat: idx(0)?,
                block: idx(1)?,
                i: idx(2)?,
                j: idx(3)?,
                value: toks[4].parse().map_err(|e| syntax(ln, format!("value: {e}")))?,
            };
            if e.mat > m || e.block == 0 || e.block > nb {
                return Err(syntax(ln, format!("entry {:?} out of range", (e.mat, e.block))));
            }
            let size = block_struct[e.block - 1].unsigned_abs() as usize;
            if e.i == 0 || e.i > e.j || e.j > size {
                return Err(syntax(ln, format!("index ({}, {}) invalid for block of size {size}", e.i, e.j)));
            }
            entries.push(e);
        }
        Ok(SdpaProblem { comment, block_struct, c, entries })
    }

    /// Objective and PSD diagnostics of a candidate `η`, computed from the file contents alone.
    pub fn evaluate(&self, eta: &[f64]) -> Result<EtaEvaluation, SdpaError> {
        if eta.len() != self.c.len() {
            return Err(SdpaError::Length { got: eta.len(), expected: self.c.len() });
        }
        if let Some((index, &value)) = eta.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(SdpaError::Negative { index, value });
        }
        let dims: Vec<usize> = self.block_struct.iter().take(2).map(|&b| b.unsigned_abs() as usize).collect();
        let mut mats: Vec<Matrix> = dims.iter().map(|&d| Matrix::zeros(d)).collect();
        for e in &self.entries {
            if e.mat == 0 || e.block > 2 {
                continue;
            }
            let w = eta[e.mat - 1] * e.value;
            let m = &mut mats[e.block - 1];
            m[(e.i - 1, e.j - 1)] += w;
            if e.i != e.j {
                m[(e.j - 1, e.i - 1)] += w;
            }
        }
        Ok(EtaEvaluation {
            objective: self.c.iter().zip(eta).map(|(c, e)| c * e).sum(),
            min_eig_q: mats[0].min_eigenvalue(),
            min_eig_f: mats[1].min_eigenvalue(),
            sum: eta.iter().sum(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidecarVar {
    /// 1-based SDPA variable number.
    pub eta: usize,
    pub cell: [usize; 3],
    pub sub: usize,
    pub parts: usize,
    /// `(y_uv, y_uw, y_vw, y_uvw)`.
    pub corner: [f64; 4],
    pub d_tilde: f64,
}

/// Maps each SDPA variable back to its cell and corner triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub alpha: f64,
    pub rules: String,
    pub breakpoints: Vec<f64>,
    pub refine: Vec<RefineRule>,
    pub cells: usize,
    pub coalesced: usize,
    pub vars: Vec<SidecarVar>,
}

impl Sidecar {
    pub fn from_model(model: &SdpModel) -> Self {
        Sidecar {
            schema_version: SCHEMA_VERSION,
            alpha: model.alpha,
            rules: model.rules.clone(),
            breakpoints: model.disc.breakpoints().to_vec(),
            refine: model.disc.refine_rules().to_vec(),
            cells: model.cells.len(),
            coalesced: model.coalesced,
            vars: model
                .vars
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let c = &model.cells[v.cell].cell;
                    SidecarVar {
                        eta: k + 1,
                        cell: c.idx,
                        sub: c.sub,
                        parts: c.parts,
                        corner: v.corner,
                        d_tilde: v.d_tilde,
                    }
                })
                .collect(),
        }
    }
}

/// Path of the sidecar written next to a `.dat-s` file.
pub fn sidecar_path(model_path: &std::path::Path) -> std::path::PathBuf {
    let mut p = model_path.as_os_str().to_owned();
    p.push(".json");
    p.into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clusterlp_core::rounding::RuleSet;
    use clusterlp_core::sdp::{assemble_matrices, evaluate_eta, Discretization};
    use clusterlp_core::triangle::BudgetSpec;

    fn model() -> SdpModel {
        let disc =
            Discretization::new(vec![0.0, 0.4, 0.7, 1.0], vec![RefineRule { lo: 0.4, hi: 1.0, parts: 3 }]).unwrap();
        assemble_matrices(&disc, &RuleSet::alg4(), &BudgetSpec::new(1.485).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = SdpaProblem::from_model(&model()).unwrap();
        assert_eq!(p.block_struct.len(), 3);
        let text = p.to_sdpa_string();
        let back = SdpaProblem::parse(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_sdpa_string(), text);
    }

    #[test]
    fn file_evaluation_matches_model() {
        let m = model();
        let p = SdpaProblem::from_model(&m).unwrap();
        let k = m.vars.len();
        let eta: Vec<f64> = (0..k).map(|i| (1 + i % 7) as f64).collect();
        let s: f64 = eta.iter().sum();
        let eta: Vec<f64> = eta.iter().map(|e| e / s).collect();
        let a = p.evaluate(&eta).unwrap();
        let b = evaluate_eta(&m, &eta).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-12);
        assert!((a.min_eig_q - b.min_eig_q).abs() < 1e-9);
        assert!((a.min_eig_f - b.min_eig_f).abs() < 1e-9);
        assert!(p.evaluate(&eta[1..]).is_err());
    }

    #[test]
    fn parser_rejects_garbage() {
        assert!(SdpaProblem::parse("").is_err());
        assert!(SdpaProblem::parse("1\n1\n2\n0.5\n1 1 2 1 3.0\n").is_err());
        let ok = SdpaProblem::parse("\"c\n1 = mDIM\n1 = nBLOCK\n{2}\n{0.5}\n1 1 1 2 3.0\n").unwrap();
        assert_eq!(ok.block_struct, vec![2]);
        assert_eq!(ok.entries[0].value, 3.0);
    }

    #[test]
    fn empty_model_is_rejected() {
        let mut m = model();
        m.vars.clear();
        assert!(matches!(SdpaProblem::from_model(&m), Err(SdpaError::EmptyModel)));
    }
}
