//! CSV writers for trajectories and energy logs.

use std::io::Write;

use rbm_core::ParticleState;

use crate::error::Result;
use crate::md::EnergyRecord;

/// Rows `step,particle,x,y,z,vx,vy,vz` (velocities empty when absent).
pub struct TrajectoryWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(["step", "particle", "x", "y", "z", "vx", "vy", "vz"])?;
        Ok(Self { inner })
    }

    pub fn write_frame(&mut self, step: u64, state: &ParticleState) -> Result<()> {
        for i in 0..state.len() {
            let mut row = vec![step.to_string(), i.to_string()];
            row.extend(state.position(i).iter().map(f64::to_string));
            match state.velocity(i) {
                Some(v) => row.extend(v.iter().map(f64::to_string)),
                None => row.extend(std::iter::repeat_n(String::new(), 3)),
            }
            self.inner.write_record(&row)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Rows `step,U_real,U_fourier,U_self,kinetic,T_inst`.
pub struct EnergyWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> EnergyWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(["step", "U_real", "U_fourier", "U_self", "kinetic", "T_inst"])?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, step: u64, e: &EnergyRecord) -> Result<()> {
        self.inner.write_record([
            step.to_string(),
            e.real.to_string(),
            e.fourier.to_string(),
            e.self_energy.to_string(),
            e.kinetic.to_string(),
            e.temperature.to_string(),
        ])?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_rows() {
        let s = ParticleState::new(3, vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
            .unwrap()
            .with_velocities(vec![0.1, 0.2, 0.3, -0.1, -0.2, -0.3])
            .unwrap();
        let mut buf = Vec::new();
        {
            let mut w = TrajectoryWriter::new(&mut buf).unwrap();
            w.write_frame(7, &s).unwrap();
            w.flush().unwrap();
        }
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,particle,x,y,z,vx,vy,vz");
        assert_eq!(lines[2], "7,1,2,2.5,3,-0.1,-0.2,-0.3");
    }

    #[test]
    fn energy_rows() {
        let e = EnergyRecord {
            real: -1.5,
            fourier: 2.0,
            self_energy: -3.0,
            lj: 0.0,
            kinetic: 4.5,
            temperature: 1.0,
        };
        let mut buf = Vec::new();
        {
            let mut w = EnergyWriter::new(&mut buf).unwrap();
            w.write(3, &e).unwrap();
            w.flush().unwrap();
        }
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "step,U_real,U_fourier,U_self,kinetic,T_inst\n3,-1.5,2,-3,4.5,1\n");
    }
}
