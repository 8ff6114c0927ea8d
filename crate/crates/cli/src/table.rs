//! CSV tables: 17 significant digits, `.` separator, LF endings.

use std::path::Path;

/// Round-trip-exact scientific notation.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows are buffered so that a failed computation never leaves a partial file.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len(), "row width must match the header");
        self.rows.push(cells);
    }

    pub fn numeric_row(&mut self, values: &[f64]) {
        self.row(values.iter().map(|&v| number(v)).collect());
    }

    fn writer<W: std::io::Write>(sink: W) -> csv::Writer<W> {
        csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(sink)
    }

    fn write_to<W: std::io::Write>(&self, out: &mut csv::Writer<W>) -> csv::Result<()> {
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> csv::Result<()> {
        let mut out = Self::writer(std::fs::File::create(path)?);
        self.write_to(&mut out)
    }

    #[cfg(test)]
    fn render(&self) -> String {
        let mut out = Self::writer(Vec::new());
        self.write_to(&mut out).unwrap();
        String::from_utf8(out.into_inner().unwrap()).unwrap()
    }
}
