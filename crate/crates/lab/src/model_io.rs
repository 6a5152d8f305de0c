//! Line-oriented text formats for fitted models and model truths.
//!
//! Each line is a key followed by space-separated values. Numbers use Rust's shortest
//! round-trip formatting, so reading a file back gives bit-identical scores. A model file
//! keeps what scoring needs plus the selection diagnostics; the precision estimates are
//! not stored.
//!
//! ```text
//! rwqda-model v1
//! variant qdafs-pcs
//! dim 3
//! constant -0.25
//! ...
//! end
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rwqda_core::arw::{MeanVector, PrecisionMatrix};
use rwqda_core::classify::{Scaling, TrainedClassifier, Variant};
use rwqda_core::linalg::SparseSym;

use crate::error::{LabError, Result};

pub const MODEL_MAGIC: &str = "rwqda-model v1";
pub const TRUTH_MAGIC: &str = "rwqda-truth v1";

fn put_vec<T: std::fmt::Debug>(s: &mut String, key: &str, v: &[T]) {
    s.push_str(key);
    for x in v {
        let _ = write!(s, " {x:?}");
    }
    s.push('\n');
}

fn put_sym(s: &mut String, prefix: &str, m: &SparseSym) {
    put_vec(s, &format!("{prefix}_diag"), m.diag());
    let _ = writeln!(s, "{prefix}_off {}", m.offdiag().len());
    for &(i, j, v) in m.offdiag() {
        let _ = writeln!(s, "{i} {j} {v:?}");
    }
}

pub fn model_to_string(m: &TrainedClassifier) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MODEL_MAGIC}");
    let _ = writeln!(s, "variant {}", m.variant);
    let _ = writeln!(s, "dim {}", m.dim());
    let _ = writeln!(s, "constant {:?}", m.constant);
    let _ = writeln!(s, "t {:?}", m.t);
    let _ = writeln!(s, "linear_on_scaled {}", u8::from(m.linear_on_scaled));
    put_vec(&mut s, "linear", &m.linear);
    put_sym(&mut s, "quad", &m.quad);
    match &m.scaling {
        None => s.push_str("scaling 0\n"),
        Some(sc) => {
            s.push_str("scaling 1\n");
            put_vec(&mut s, "center", &sc.center);
            put_vec(&mut s, "scale", &sc.scale);
        }
    }
    put_vec(&mut s, "d", &m.d);
    put_vec(&mut s, "d_sel", &m.d_sel);
    put_vec(&mut s, "dropped", &m.dropped);
    put_vec(&mut s, "mu0_hat", &m.mu0_hat);
    put_vec(&mut s, "mu1_hat", &m.mu1_hat);
    s.push_str("end\n");
    s
}

struct Lines<'a> {
    origin: &'a str,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, origin: &'a str) -> Self {
        Lines {
            origin,
            iter: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> LabError {
        LabError::Parse {
            path: self.origin.to_string(),
            line: self.line,
            column: 1,
            message: msg.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        match self.iter.next() {
            Some((k, l)) => {
                self.line = k + 1;
                Ok(l.trim_end())
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    /// Next line, which must start with `key`; returns the rest.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next_line()?;
        let (k, rest) = l.split_once(' ').unwrap_or((l, ""));
        if k != key {
            return Err(self.err(format!("expected {key:?}, found {k:?}")));
        }
        Ok(rest)
    }

    fn scalar<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let rest = self.keyed(key)?;
        rest.trim()
            .parse()
            .map_err(|_| self.err(format!("{key}: cannot parse {rest:?}")))
    }

    fn vec<T: FromStr>(&mut self, key: &str, len: Option<usize>) -> Result<Vec<T>> {
        let rest = self.keyed(key)?;
        let v = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<T>()
                    .map_err(|_| self.err(format!("{key}: cannot parse {t:?}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if let Some(n) = len {
            if v.len() != n {
                return Err(self.err(format!("{key}: expected {n} values, found {}", v.len())));
            }
        }
        Ok(v)
    }

    fn sym(&mut self, prefix: &str, p: usize) -> Result<SparseSym> {
        let diag = self.vec::<f64>(&format!("{prefix}_diag"), Some(p))?;
        let count: usize = self.scalar(&format!("{prefix}_off"))?;
        let mut off = Vec::with_capacity(count);
        for _ in 0..count {
            let l = self.next_line()?;
            let t: Vec<&str> = l.split_whitespace().collect();
            let parsed = match t[..] {
                [i, j, v] => (i.parse::<usize>(), j.parse::<usize>(), v.parse::<f64>()),
                _ => return Err(self.err("expected `i j value`")),
            };
            match parsed {
                (Ok(i), Ok(j), Ok(v)) => off.push((i, j, v)),
                _ => return Err(self.err("expected `i j value`")),
            }
        }
        SparseSym::new(diag, off).map_err(|e| self.err(e.to_string()))
    }

    fn magic(&mut self, magic: &str) -> Result<()> {
        let l = self.next_line()?;
        if l != magic {
            return Err(self.err(format!("expected header {magic:?}")));
        }
        Ok(())
    }

    fn end(&mut self) -> Result<()> {
        let l = self.next_line()?;
        if l != "end" {
            return Err(self.err("expected \"end\""));
        }
        Ok(())
    }
}

pub fn model_from_str(text: &str, origin: &str) -> Result<TrainedClassifier> {
    let mut r = Lines::new(text, origin);
    r.magic(MODEL_MAGIC)?;
    let name: String = r.scalar("variant")?;
    let variant =
        Variant::from_name(&name).ok_or_else(|| r.err(format!("unknown variant {name:?}")))?;
    let p: usize = r.scalar("dim")?;
    let constant: f64 = r.scalar("constant")?;
    let t: f64 = r.scalar("t")?;
    let linear_on_scaled = r.scalar::<u8>("linear_on_scaled")? == 1;
    let linear = r.vec("linear", Some(p))?;
    let quad = r.sym("quad", p)?;
    let scaling = match r.scalar::<u8>("scaling")? {
        0 => None,
        _ => Some(Scaling {
            center: r.vec("center", Some(p))?,
            scale: r.vec("scale", Some(p))?,
        }),
    };
    let m = TrainedClassifier {
        variant,
        quad,
        linear,
        constant,
        scaling,
        linear_on_scaled,
        omega0: None,
        omega1: None,
        omega_diff: None,
        d: r.vec("d", None)?,
        d_sel: r.vec("d_sel", None)?,
        t,
        dropped: r.vec("dropped", None)?,
        mu0_hat: r.vec("mu0_hat", None)?,
        mu1_hat: r.vec("mu1_hat", None)?,
    };
    r.end()?;
    Ok(m)
}

pub fn save_model(m: &TrainedClassifier, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(m)).map_err(|e| LabError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedClassifier> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    model_from_str(&text, &path.display().to_string())
}

/// The parameters of one model draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub mu: MeanVector,
    pub omega0: PrecisionMatrix,
    pub omega1: PrecisionMatrix,
}

pub fn truth_to_string(t: &Truth) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{TRUTH_MAGIC}");
    let _ = writeln!(s, "dim {}", t.mu.dim());
    put_vec(&mut s, "mu", &t.mu.values);
    put_sym(&mut s, "omega0", t.omega0.entries());
    put_sym(&mut s, "omega1", t.omega1.entries());
    s.push_str("end\n");
    s
}

pub fn truth_from_str(text: &str, origin: &str) -> Result<Truth> {
    let mut r = Lines::new(text, origin);
    r.magic(TRUTH_MAGIC)?;
    let p: usize = r.scalar("dim")?;
    let mu = MeanVector::from_values(r.vec("mu", Some(p))?);
    let o0 = r.sym("omega0", p)?;
    let o1 = r.sym("omega1", p)?;
    r.end()?;
    Ok(Truth {
        mu,
        omega0: PrecisionMatrix::new(o0)?,
        omega1: PrecisionMatrix::new(o1)?,
    })
}

pub fn load_truth(path: &Path) -> Result<Truth> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    truth_from_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rwqda_core::classify::TrainedClassifier;

    fn sample_model() -> TrainedClassifier {
        let quad = SparseSym::new(vec![0.0, -1e-300, 0.5], vec![(0, 2, 1.0 / 3.0)]).unwrap();
        TrainedClassifier {
            variant: Variant::Algorithm2,
            quad,
            linear: vec![0.1, 0.0, -7e-12],
            constant: -3.0,
            scaling: Some(Scaling {
                center: vec![0.0, 1.5, -2.0],
                scale: vec![1.0, 0.25, 3.0],
            }),
            linear_on_scaled: false,
            omega0: None,
            omega1: None,
            omega_diff: None,
            mu0_hat: vec![0.1, 0.2, 0.3],
            mu1_hat: vec![-0.1, 0.2, 0.3],
            d: vec![0.1, 0.01, -7e-12],
            d_sel: vec![1, 0, 1],
            t: 0.05,
            dropped: vec![],
        }
    }

    #[test]
    fn model_round_trip_is_exact() {
        let m = sample_model();
        let text = model_to_string(&m);
        assert!(text.starts_with("rwqda-model v1\n"));
        let back = model_from_str(&text, "m").unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_string(&back), text);
        let x = [0.3, -1.0, 2.0];
        assert_eq!(back.score(&x).unwrap(), m.score(&x).unwrap());
    }

    #[test]
    fn rejects_corrupt_files() {
        let text = model_to_string(&sample_model());
        assert!(model_from_str(&text.replace("v1", "v9"), "m").is_err());
        let e = model_from_str(&text.replace("dim 3", "dim 4"), "m").unwrap_err();
        assert!(matches!(e, LabError::Parse { line: 7, .. }), "{e}");
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(model_from_str(&cut, "m").is_err());
    }

    #[test]
    fn truth_round_trip() {
        let t = Truth {
            mu: MeanVector::from_values(vec![0.0, 0.2, 0.0]),
            omega0: PrecisionMatrix::identity(3),
            omega1: PrecisionMatrix::new(SparseSym::new(vec![1.1; 3], vec![(1, 2, -0.3)]).unwrap())
                .unwrap(),
        };
        let back = truth_from_str(&truth_to_string(&t), "t").unwrap();
        assert_eq!(back, t);
    }
}
