use std::fmt;
use std::str::FromStr;

use super::Gate;
use crate::error::{QelError, Result};
use crate::linalg::Matrix;

/// An ordered gate sequence over dimension `n`. The realized matrix is
/// `G_m ⋯ G_1`, i.e. gates are applied left to right to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GateProgram {
    n: usize,
    gates: Vec<Gate>,
}

impl GateProgram {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QelError::InvalidDimension {
                n,
                reason: "dimension must be positive",
            });
        }
        Ok(GateProgram {
            n,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut p = Self::new(n)?;
        for (t, g) in gates.iter().enumerate() {
            g.validate(n).map_err(|e| e.at_step(t + 1))?;
        }
        p.gates = gates;
        Ok(p)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)
            .map_err(|e| e.at_step(self.gates.len() + 1))?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends all gates of `other`, which must share the dimension.
    pub fn extend_from(&mut self, other: &GateProgram) -> Result<()> {
        if other.n != self.n {
            return Err(QelError::ShapeMismatch {
                what: "program concatenation",
                expected: (self.n, self.n),
                found: (other.n, other.n),
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn rotation_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_rotation()).count()
    }

    pub fn constant_count(&self) -> usize {
        self.len() - self.rotation_count()
    }

    /// Program computing the inverse matrix: reversed order, negated
    /// angles, reciprocal constants.
    pub fn inverse(&self) -> GateProgram {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| match *g {
                Gate::Rotation { i, i2, theta } => Gate::rotation(i, i2, -theta),
                Gate::Constant { i, c } => Gate::constant(i, 1.0 / c),
            })
            .collect();
        GateProgram { n: self.n, gates }
    }

    /// Applies every gate to a copy of the identity. Tracks `M` only.
    pub fn realize(&self) -> Matrix {
        let mut m = Matrix::identity(self.n);
        for g in &self.gates {
            g.apply_to(&mut m);
        }
        m
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl fmt::Display for GateProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {} m {}", self.n, self.gates.len())?;
        for g in &self.gates {
            match *g {
                Gate::Rotation { i, i2, theta } => writeln!(f, "R {i} {i2} {theta:?}")?,
                Gate::Constant { i, c } => writeln!(f, "C {i} {c:?}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for GateProgram {
    type Err = QelError;

    /// Parses the line format. Blank lines and lines starting with `#` are
    /// ignored.
    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(QelError::Parse {
            line: 0,
            msg: "empty program text".into(),
        })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (n, m) = match h.as_slice() {
            ["n", n, "m", m] => (parse_num::<usize>(n, hline)?, parse_num::<usize>(m, hline)?),
            _ => {
                return Err(QelError::Parse {
                    line: hline,
                    msg: format!("expected `n <dim> m <count>`, found `{header}`"),
                })
            }
        };

        let mut program = GateProgram::new(n).map_err(|e| QelError::Parse {
            line: hline,
            msg: e.to_string(),
        })?;
        for (line, l) in lines {
            let tok: Vec<&str> = l.split_whitespace().collect();
            let gate = match tok.as_slice() {
                ["R", i, i2, theta] => Gate::rotation(
                    parse_num(i, line)?,
                    parse_num(i2, line)?,
                    parse_num(theta, line)?,
                ),
                ["C", i, c] => Gate::constant(parse_num(i, line)?, parse_num(c, line)?),
                _ => {
                    return Err(QelError::Parse {
                        line,
                        msg: format!("unrecognized gate line `{l}`"),
                    })
                }
            };
            program.push(gate).map_err(|e| QelError::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        if program.len() != m {
            return Err(QelError::Parse {
                line: hline,
                msg: format!("header announces {m} gates, found {}", program.len()),
            });
        }
        Ok(program)
    }
}

fn parse_num<T: FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| QelError::Parse {
        line,
        msg: format!("bad number `{tok}`"),
    })
}
