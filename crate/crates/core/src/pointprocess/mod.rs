//! Poisson point processes on the flat torus and fixed-radius neighbour search.

mod grid;

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

pub use grid::{build_index, build_index_with_support, GridIndex};

use crate::error::{Error, Result};
use crate::geometry::TorusPoint;

/// A finite configuration on `[0,1)^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
    pub intensity_n: f64,
    pub seed: u64,
}

impl PointSet {
    pub fn new(d: usize, coords: Vec<f64>, intensity_n: f64, seed: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid("torus dimension must be at least 2"));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::invalid(format!("{} coordinates do not split into rows of {d}", coords.len())));
        }
        if let Some(c) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::invalid(format!("coordinate {c} outside [0,1)")));
        }
        Ok(PointSet {
            d,
            coords,
            intensity_n,
            seed,
        })
    }

    pub fn from_points(points: &[TorusPoint], intensity_n: f64, seed: u64) -> Result<Self> {
        let d = points.first().map_or(2, TorusPoint::dim);
        let mut coords = Vec::with_capacity(d * points.len());
        for p in points {
            if p.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
            }
            coords.extend_from_slice(p.coords());
        }
        Self::new(d, coords, intensity_n, seed)
    }

    pub fn empty(d: usize) -> Result<Self> {
        Self::new(d, Vec::new(), 0.0, 0)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn torus_point(&self, i: usize) -> TorusPoint {
        TorusPoint::wrapped(self.point(i))
    }

    /// Every point shifted by `v` modulo 1.
    pub fn translated(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: v.len() });
        }
        let coords = self
            .coords
            .chunks_exact(self.d)
            .flat_map(|p| p.iter().zip(v).map(|(a, b)| crate::geometry::wrap(a + b)))
            .collect();
        Ok(PointSet { coords, ..self.clone() })
    }

    /// Writes a header `x1,...,xd` followed by one row per point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record((1..=self.d).map(|i| format!("x{i}")))?;
        for p in self.coords.chunks_exact(self.d) {
            wr.write_record(p.iter().map(|c| format!("{c:?}")))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV layout of [`PointSet::write_csv`]; the dimension comes
    /// from the header and every coordinate must lie in `[0,1)`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let d = header.len();
        for (i, h) in header.iter().enumerate() {
            if h.trim() != format!("x{}", i + 1) {
                return Err(Error::Parse(format!("expected header x1,...,xd, found {h:?} in column {}", i + 1)));
            }
        }
        let mut coords = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            for f in rec.iter() {
                let c: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: {f:?} is not a number", line + 2)))?;
                coords.push(c);
            }
        }
        let n = (coords.len() / d.max(1)) as f64;
        Self::new(d, coords, n, 0)
    }
}

/// Independent stream for one replicate: seeded by the master seed with the
/// replicate id selecting the ChaCha stream, so results do not depend on
/// which thread runs which replicate.
pub fn replicate_rng(master_seed: u64, replicate_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate_id);
    rng
}

/// `N ~ Poisson(n)` then `N` i.i.d. uniform points on `[0,1)^d`.
pub fn sample_poisson<R: Rng + ?Sized>(n: f64, d: usize, rng: &mut R) -> Result<PointSet> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::invalid(format!("intensity must be positive, got {n}")));
    }
    if d < 2 {
        return Err(Error::invalid("torus dimension must be at least 2"));
    }
    let count = Poisson::new(n).map_err(|e| Error::invalid(e.to_string()))?.sample(rng) as usize;
    let coords = (0..count * d).map(|_| rng.random::<f64>()).collect();
    Ok(PointSet {
        d,
        coords,
        intensity_n: n,
        seed: 0,
    })
}

/// [`sample_poisson`] on the stream of `(master_seed, replicate_id)`.
pub fn sample_replicate(n: f64, d: usize, master_seed: u64, replicate_id: u64) -> Result<PointSet> {
    let mut rng = replicate_rng(master_seed, replicate_id);
    let mut ps = sample_poisson(n, d, &mut rng)?;
    ps.seed = master_seed;
    Ok(ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_count_moments() {
        let n = 1000.0;
        let counts: Vec<f64> = (0..2000).map(|i| sample_replicate(n, 2, 42, i).unwrap().len() as f64).collect();
        let mean500 = counts[..500].iter().sum::<f64>() / 500.0;
        assert!((mean500 - n).abs() <= 3.0 * (n / 500.0).sqrt(), "{mean500}");
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
        assert!((var / n - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn determinism_and_streams() {
        let a = sample_replicate(300.0, 3, 7, 5).unwrap();
        assert_eq!(a, sample_replicate(300.0, 3, 7, 5).unwrap());
        assert_ne!(a, sample_replicate(300.0, 3, 7, 6).unwrap());
        assert!(a.coords().iter().all(|c| (0.0..1.0).contains(c)));
    }

    #[test]
    fn csv_round_trip() {
        let ps = sample_replicate(50.0, 3, 1, 0).unwrap();
        let mut buf = Vec::new();
        ps.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x1,x2,x3\n"));
        let back = PointSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.coords(), ps.coords());
    }

    #[test]
    fn csv_rejects_out_of_range_and_bad_header() {
        assert!(PointSet::read_csv("x1,x2\n0.5,1.0\n".as_bytes()).is_err());
        assert!(PointSet::read_csv("x1,x2\n0.5,-0.1\n".as_bytes()).is_err());
        assert!(PointSet::read_csv("a,b\n0.5,0.5\n".as_bytes()).is_err());
        assert!(PointSet::read_csv("x1,x2\n0.5,zz\n".as_bytes()).is_err());
    }

    #[test]
    fn invalid_sampling_arguments() {
        let mut rng = replicate_rng(0, 0);
        assert!(sample_poisson(0.0, 2, &mut rng).is_err());
        assert!(sample_poisson(10.0, 1, &mut rng).is_err());
    }
}
