use num_bigint::BigInt;
use num_rational::BigRational;

/// Result rows sharing one header; failed rows keep their key columns and
/// carry the message in the trailing `error` column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub failed: usize,
    key_len: usize,
}

impl Table {
    pub fn new(keys: &[&str], values: &[&str]) -> Self {
        let header = keys
            .iter()
            .chain(values)
            .chain(std::iter::once(&"error"))
            .map(|s| s.to_string())
            .collect();
        Self {
            header,
            rows: Vec::new(),
            failed: 0,
            key_len: keys.len(),
        }
    }

    pub fn push(&mut self, key: Vec<String>, values: anyhow::Result<Vec<String>>) {
        debug_assert_eq!(key.len(), self.key_len);
        let width = self.header.len();
        let mut row = key;
        match values {
            Ok(v) => {
                row.extend(v);
                row.push(String::new());
            }
            Err(e) => {
                self.failed += 1;
                row.resize(width - 1, String::new());
                row.push(format!("{e:#}"));
            }
        }
        debug_assert_eq!(row.len(), width);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Shortest round-trip decimal; never uses exponent notation.
pub fn fmt_f64(v: f64) -> String {
    v.to_string()
}

pub fn fmt_int(v: impl ToString) -> String {
    v.to_string()
}

/// Integers exactly, other rationals as the nearest double.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        fmt_f64(crate::formulas::rational_to_f64(r))
    }
}
