use std::fmt::Write as _;

use crate::plan::Format;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Count(usize),
    Value(f64),
    /// Budget exhausted before reaching the threshold.
    Missing,
    /// The run stopped on a numerical failure first.
    Failed,
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Self::Count(k) => k.to_string(),
            Self::Value(v) => format!("{v:.2e}"),
            Self::Missing => "-".into(),
            Self::Failed => "!".into(),
        }
    }

    pub fn count(&self) -> Option<usize> {
        match *self {
            Self::Count(k) => Some(k),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Self::Value(v) => Some(v),
            _ => None,
        }
    }
}

/// One row per ε, one column per method.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub title: String,
    pub epsilons: Vec<f64>,
    pub methods: Vec<String>,
    /// `cells[row][col]`
    pub cells: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn column(&self, method: &str) -> Option<Vec<Cell>> {
        let j = self.methods.iter().position(|m| m == method)?;
        Some(self.cells.iter().map(|row| row[j]).collect())
    }

    pub fn cell(&self, epsilon: f64, method: &str) -> Option<Cell> {
        let i = self.epsilons.iter().position(|e| *e == epsilon)?;
        self.column(method).map(|c| c[i])
    }
}

pub fn emit_table(table: &ResultTable, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("epsilon");
            for m in &table.methods {
                let _ = write!(out, ",{m}");
            }
            out.push('\n');
            for (eps, row) in table.epsilons.iter().zip(&table.cells) {
                let _ = write!(out, "{eps:e}");
                for c in row {
                    let _ = write!(out, ",{}", c.render());
                }
                out.push('\n');
            }
        }
        Format::Markdown => {
            let _ = writeln!(out, "{}\n", table.title);
            out.push_str("| ε |");
            for m in &table.methods {
                let _ = write!(out, " {m} |");
            }
            out.push_str("\n|---:|");
            out.push_str(&"---:|".repeat(table.methods.len()));
            out.push('\n');
            for (eps, row) in table.epsilons.iter().zip(&table.cells) {
                let _ = write!(out, "| {eps:e} |");
                for c in row {
                    let _ = write!(out, " {} |", c.render());
                }
                out.push('\n');
            }
        }
    }
    out
}
