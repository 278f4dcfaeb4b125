//! Plain-text problem dump for offline cross-checks.
//!
//! Whitespace-separated tokens, one keyword-led record per line:
//!
//! ```text
//! sdp 1
//! matrix_dim 2
//! hermitian true
//! sense maximize
//! scalars 1
//! scalar v -10
//! objective
//! form const 0 scalars 1 0 1 matrix none
//! lmis 0
//! linear 1
//! relation ge
//! form const 0 scalars 1 0 -1 matrix dense
//! 0 0 0.3 -0.55
//! 0.3 0.55 0 0
//! ```
//!
//! Dense matrices list `re im` pairs row by row. Floats use the shortest
//! representation that round-trips exactly.

use std::fmt::Write as _;

use super::{AffineForm, LinearConstraint, Lmi, Relation, ScalarVar, SdpProblem, Sense};
use crate::error::{Error, Result};
use crate::{CMatrix, Complex64};

pub fn dump(p: &SdpProblem) -> Result<String> {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "sdp 1");
    let _ = writeln!(w, "matrix_dim {}", p.matrix_dim);
    let _ = writeln!(w, "hermitian {}", p.hermitian);
    let sense = match p.sense {
        Sense::Minimize => "minimize",
        Sense::Maximize => "maximize",
    };
    let _ = writeln!(w, "sense {sense}");
    let _ = writeln!(w, "scalars {}", p.scalars.len());
    for s in &p.scalars {
        if s.name.is_empty() || s.name.chars().any(char::is_whitespace) {
            return Err(Error::Domain(format!(
                "scalar name {:?} cannot be serialized",
                s.name
            )));
        }
        let _ = writeln!(w, "scalar {} {:?}", s.name, s.lower);
    }
    let _ = writeln!(w, "objective");
    write_form(w, &p.objective);
    let _ = writeln!(w, "lmis {}", p.lmis.len());
    for l in &p.lmis {
        let _ = writeln!(w, "lmi {}", l.dim);
        for f in &l.entries {
            write_form(w, f);
        }
    }
    let _ = writeln!(w, "linear {}", p.linear.len());
    for r in &p.linear {
        let rel = match r.relation {
            Relation::Eq => "eq",
            Relation::Ge => "ge",
            Relation::Le => "le",
        };
        let _ = writeln!(w, "relation {rel}");
        write_form(w, &r.form);
    }
    Ok(out)
}

fn write_form(w: &mut String, f: &AffineForm) {
    let _ = write!(w, "form const {:?} scalars {}", f.constant, f.scalars.len());
    for (k, c) in &f.scalars {
        let _ = write!(w, " {k} {c:?}");
    }
    match &f.matrix {
        None => {
            let _ = writeln!(w, " matrix none");
        }
        Some(h) => {
            let _ = writeln!(w, " matrix dense");
            for i in 0..h.nrows() {
                let row: Vec<String> = (0..h.ncols())
                    .map(|j| format!("{:?} {:?}", h[(i, j)].re, h[(i, j)].im))
                    .collect();
                let _ = writeln!(w, "{}", row.join(" "));
            }
        }
    }
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        Self { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items
            .get(self.pos.saturating_sub(1))
            .map_or(0, |t| t.0)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Config {
            line: self.line(),
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        let t = self.items.get(self.pos).map(|t| t.1);
        match t {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn expect(&mut self, kw: &str) -> Result<()> {
        let t = self.next()?;
        if t == kw {
            Ok(())
        } else {
            Err(self.err(format!("expected `{kw}`, found `{t}`")))
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let t = self.next()?;
        t.parse()
            .map_err(|_| self.err(format!("invalid {what} `{t}`")))
    }

    fn keyed<T: std::str::FromStr>(&mut self, kw: &str) -> Result<T> {
        self.expect(kw)?;
        self.parse(kw)
    }
}

pub fn load(text: &str) -> Result<SdpProblem> {
    let mut t = Tokens::new(text);
    let version: u32 = t.keyed("sdp")?;
    if version != 1 {
        return Err(t.err(format!("unsupported format version {version}")));
    }
    let n: usize = t.keyed("matrix_dim")?;
    let hermitian: bool = t.keyed("hermitian")?;
    t.expect("sense")?;
    let sense = match t.next()? {
        "minimize" => Sense::Minimize,
        "maximize" => Sense::Maximize,
        other => return Err(t.err(format!("unknown sense `{other}`"))),
    };
    let mut p = SdpProblem::new(n, hermitian, sense);
    let ns: usize = t.keyed("scalars")?;
    for _ in 0..ns {
        t.expect("scalar")?;
        let name = t.next()?.to_string();
        let lower: f64 = t.parse("lower bound")?;
        p.scalars.push(ScalarVar { name, lower });
    }
    t.expect("objective")?;
    p.objective = read_form(&mut t, n)?;
    let nl: usize = t.keyed("lmis")?;
    for _ in 0..nl {
        let dim: usize = t.keyed("lmi")?;
        let mut lmi = Lmi::zeros(dim);
        for e in lmi.entries.iter_mut() {
            *e = read_form(&mut t, n)?;
        }
        p.lmis.push(lmi);
    }
    let nr: usize = t.keyed("linear")?;
    for _ in 0..nr {
        t.expect("relation")?;
        let relation = match t.next()? {
            "eq" => Relation::Eq,
            "ge" => Relation::Ge,
            "le" => Relation::Le,
            other => return Err(t.err(format!("unknown relation `{other}`"))),
        };
        let form = read_form(&mut t, n)?;
        p.linear.push(LinearConstraint { form, relation });
    }
    if t.pos != t.items.len() {
        return Err(t.err("trailing tokens"));
    }
    p.validate()?;
    Ok(p)
}

fn read_form(t: &mut Tokens<'_>, n: usize) -> Result<AffineForm> {
    t.expect("form")?;
    let constant: f64 = t.keyed("const")?;
    let k: usize = t.keyed("scalars")?;
    let mut scalars = Vec::with_capacity(k);
    for _ in 0..k {
        let idx: usize = t.parse("scalar index")?;
        let c: f64 = t.parse("coefficient")?;
        scalars.push((idx, c));
    }
    t.expect("matrix")?;
    let matrix = match t.next()? {
        "none" => None,
        "dense" => {
            let mut h = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let re: f64 = t.parse("matrix entry")?;
                    let im: f64 = t.parse("matrix entry")?;
                    h[(i, j)] = Complex64::new(re, im);
                }
            }
            Some(h)
        }
        other => return Err(t.err(format!("unknown matrix kind `{other}`"))),
    };
    Ok(AffineForm {
        matrix,
        scalars,
        constant,
    })
}
