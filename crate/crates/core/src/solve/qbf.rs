use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QbfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// ∀x1 ∃x2 ∀x3 … φ with φ in CNF. Odd variables are universal, even ones
/// existential. Literals are DIMACS-style signed variable numbers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QbfFormula {
    pub n: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl QbfFormula {
    pub fn new(n: usize, clauses: Vec<Vec<i32>>) -> Result<Self, QbfError> {
        if n == 0 {
            return Err(QbfError::Invalid(
                "formula needs at least one variable".into(),
            ));
        }
        for (k, clause) in clauses.iter().enumerate() {
            if clause.len() > 3 {
                return Err(QbfError::Invalid(format!(
                    "clause {} exceeds 3 literals",
                    k + 1
                )));
            }
            if let Some(&l) = clause
                .iter()
                .find(|&&l| l == 0 || l.unsigned_abs() as usize > n)
            {
                return Err(QbfError::Invalid(format!(
                    "clause {} references undeclared variable {l}",
                    k + 1
                )));
            }
        }
        Ok(QbfFormula { n, clauses })
    }

    /// Parses "1 2|-1 2" (clauses separated by '|').
    pub fn from_clause_text(n: usize, text: &str) -> Result<Self, QbfError> {
        let clauses = text
            .split('|')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(|c| {
                c.split_whitespace()
                    .map(|l| {
                        l.parse::<i32>()
                            .map_err(|_| QbfError::Invalid(format!("bad literal {l:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        QbfFormula::new(n, clauses)
    }

    pub fn clause_text(&self) -> String {
        self.clauses
            .iter()
            .map(|c| c.iter().map(i32::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_universal(var: usize) -> bool {
        var % 2 == 1
    }

    pub fn to_qdimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.m());
        for v in 1..=self.n {
            out.push_str(&format!(
                "{} {v} 0\n",
                if Self::is_universal(v) { 'a' } else { 'e' }
            ));
        }
        for c in &self.clauses {
            for l in c {
                out.push_str(&format!("{l} "));
            }
            out.push_str("0\n");
        }
        out
    }

    fn satisfied_by(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| values[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    fn game(&self, values: &mut Vec<bool>) -> bool {
        if values.len() == self.n {
            return self.satisfied_by(values);
        }
        let universal = Self::is_universal(values.len() + 1);
        for v in [true, false] {
            values.push(v);
            let won = self.game(values);
            values.pop();
            if won != universal {
                return won;
            }
        }
        universal
    }
}

/// Game-tree evaluation: universal levels need both branches, existential
/// levels need one.
pub fn qbf_eval(formula: &QbfFormula) -> bool {
    formula.game(&mut Vec::with_capacity(formula.n))
}

/// A winning value for the next variable after `prefix`, preferring true.
pub fn winning_choice(formula: &QbfFormula, prefix: &[bool]) -> Option<bool> {
    if prefix.len() >= formula.n {
        return None;
    }
    let mut values = prefix.to_vec();
    for v in [true, false] {
        values.push(v);
        let won = formula.game(&mut values);
        values.pop();
        if won {
            return Some(v);
        }
    }
    None
}

/// Reads the QDIMACS subset: `c` comments, `p cnf n m`, optional quantifier
/// lines that declare 1..n in order alternating from `a`, then clauses of at
/// most 3 literals each terminated by 0.
pub fn parse_qdimacs(text: &str) -> Result<QbfFormula, QbfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut declared = 0usize;
    let mut clauses = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| QbfError::Parse { line, message };
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields[0] == "p" {
            if header.is_some() {
                return Err(err("duplicate header".into()));
            }
            match fields.as_slice() {
                ["p", "cnf", n, m] => {
                    let n = n
                        .parse()
                        .map_err(|_| err(format!("bad variable count {n:?}")))?;
                    let m = m
                        .parse()
                        .map_err(|_| err(format!("bad clause count {m:?}")))?;
                    header = Some((n, m));
                }
                _ => return Err(err("expected \"p cnf <n> <m>\"".into())),
            }
            continue;
        }
        let (n, _) = header.ok_or_else(|| err("clause or quantifier before the header".into()))?;
        let numbers = |fields: &[&str]| -> Result<Vec<i32>, QbfError> {
            let mut out = Vec::new();
            for f in fields {
                out.push(
                    f.parse::<i32>()
                        .map_err(|_| err(format!("bad literal {f:?}")))?,
                );
            }
            if out.pop() != Some(0) {
                return Err(err("line must end with 0".into()));
            }
            if out.contains(&0) {
                return Err(err("0 before the end of the line".into()));
            }
            Ok(out)
        };
        if fields[0] == "a" || fields[0] == "e" {
            if !clauses.is_empty() {
                return Err(err("quantifier after clauses".into()));
            }
            let universal = fields[0] == "a";
            for v in numbers(&fields[1..])? {
                let expected = declared + 1;
                if v as usize != expected || v < 0 {
                    return Err(err(format!(
                        "expected variable {expected} next in the prefix, got {v}"
                    )));
                }
                if QbfFormula::is_universal(expected) != universal {
                    return Err(err(format!(
                        "prefix must alternate starting with a; variable {v} quantified by {}",
                        fields[0]
                    )));
                }
                declared = expected;
            }
            if declared > n {
                return Err(err(format!("prefix declares more than {n} variables")));
            }
            continue;
        }
        let clause = numbers(&fields)?;
        if clause.len() > 3 {
            return Err(err("clause exceeds 3 literals".into()));
        }
        if let Some(&l) = clause.iter().find(|&&l| l.unsigned_abs() as usize > n) {
            return Err(err(format!("literal {l} references undeclared variable")));
        }
        clauses.push(clause);
    }
    let (n, m) = header.ok_or(QbfError::Parse {
        line: 0,
        message: "missing \"p cnf\" header".into(),
    })?;
    if declared != 0 && declared != n {
        return Err(QbfError::Invalid(format!(
            "prefix declares {declared} of {n} variables"
        )));
    }
    if clauses.len() != m {
        return Err(QbfError::Invalid(format!(
            "header promises {m} clauses, found {}",
            clauses.len()
        )));
    }
    QbfFormula::new(n, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: usize, clauses: &str) -> QbfFormula {
        QbfFormula::from_clause_text(n, clauses).unwrap()
    }

    #[test]
    fn small_games() {
        assert!(qbf_eval(&f(2, "1 2|-1 2")));
        assert!(!qbf_eval(&f(2, "1 2|1 -2")));
        assert!(qbf_eval(&f(2, "")));
        assert_eq!(winning_choice(&f(2, "1 2|-1 2"), &[false]), Some(true));
        assert_eq!(winning_choice(&f(2, "1 2|1 -2"), &[false]), None);
        assert_eq!(winning_choice(&f(2, "1 2|1 -2"), &[true]), Some(true));
    }

    #[test]
    fn qdimacs_round_trip() {
        let g = f(4, "1 -2 3|-3 4|2");
        assert_eq!(parse_qdimacs(&g.to_qdimacs()).unwrap(), g);
        let plain = "c demo\np cnf 2 2\n1 2 0\n-1 2 0\n";
        assert_eq!(parse_qdimacs(plain).unwrap(), f(2, "1 2|-1 2"));
    }

    #[test]
    fn qdimacs_errors() {
        let long = "p cnf 4 1\n1 2 3 4 0\n";
        assert_eq!(
            parse_qdimacs(long).unwrap_err().to_string(),
            "line 2: clause exceeds 3 literals"
        );
        assert!(parse_qdimacs("p cnf 2 1\ne 1 0\na 2 0\n1 0\n").is_err());
        assert!(parse_qdimacs("1 2 0\n").is_err());
        assert!(parse_qdimacs("p cnf 2 2\n1 2 0\n").is_err());
        assert!(parse_qdimacs("p cnf 2 1\n1 3 0\n").is_err());
    }

    #[test]
    fn validation() {
        assert!(QbfFormula::new(2, vec![vec![1, 2, -1, -2]]).is_err());
        assert!(QbfFormula::new(2, vec![vec![0]]).is_err());
        assert_eq!(f(3, "1 -2|3").clause_text(), "1 -2|3");
    }
}
