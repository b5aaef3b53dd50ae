//! CSV output of sampled configurations.

use std::io::Write;

use crate::error::Result;

/// Rows `sweep,particle,x0,x1,...`.
pub struct SampleWriter<W: Write> {
    inner: csv::Writer<W>,
    dim: usize,
}

impl<W: Write> SampleWriter<W> {
    pub fn new(writer: W, dim: usize) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        let mut header = vec!["sweep".to_string(), "particle".to_string()];
        header.extend((0..dim).map(|c| format!("x{c}")));
        inner.write_record(&header)?;
        Ok(Self { inner, dim })
    }

    pub fn write(&mut self, sweep: u64, positions: &[f64]) -> Result<()> {
        for (i, x) in positions.chunks(self.dim).enumerate() {
            let mut row = vec![sweep.to_string(), i.to_string()];
            row.extend(x.iter().map(f64::to_string));
            self.inner.write_record(&row)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
