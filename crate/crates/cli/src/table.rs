use std::io::Write;

use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Cell::Num(_))
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Warnings become leading `#` lines, which gnuplot skips.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for w in &self.warnings {
            writeln!(out, "# warning: {}", w.replace('\n', " "))?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv))?;
        }
        writer.flush()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "warnings": self.warnings,
        })
    }

    /// Gnuplot script plotting every numeric column against the first.
    pub fn gnuplot_script(&self, data_file: &str, log_x: bool) -> String {
        let numeric: Vec<usize> = (1..self.columns.len())
            .filter(|&c| self.rows.iter().all(|r| r[c].is_numeric() || r[c] == Cell::Empty))
            .collect();
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str(&format!("set xlabel '{}'\n", self.columns[0]));
        if log_x {
            s.push_str("set logscale x\n");
        }
        s.push_str("set key outside\n");
        let plots: Vec<String> = numeric
            .iter()
            .map(|&c| format!("'{data_file}' using 1:{} skip 1 with lines title '{}'", c + 1, self.columns[c]))
            .collect();
        s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
        s
    }
}
