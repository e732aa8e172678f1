use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::TruncatedLattice;
use crate::scalar::Real;

const MAGIC: &[u8; 8] = b"TFLABMAT";

/// Dense complex matrix `(a_{μ,λ})` on `Λ_R × Λ_R`, rows `μ`, columns `λ`,
/// both in the lattice enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeMatrix<T> {
    lattice: TruncatedLattice<T>,
    entries: Vec<Complex<T>>,
}

impl<T: Real> LatticeMatrix<T> {
    pub fn new(lattice: TruncatedLattice<T>, entries: Vec<Complex<T>>) -> Result<Self> {
        let n = lattice.len();
        if entries.len() != n * n {
            return Err(Error::Shape(format!(
                "{} entries for a {n}×{n} lattice matrix",
                entries.len()
            )));
        }
        Ok(Self { lattice, entries })
    }

    pub fn zeros(lattice: TruncatedLattice<T>) -> Self {
        let n = lattice.len();
        Self {
            lattice,
            entries: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(lattice: TruncatedLattice<T>) -> Self {
        Self::from_fn(lattice, |mu, lam| {
            if mu == lam { T::one() } else { T::zero() }.into()
        })
    }

    /// Entry `(μ, λ)` from enumeration indices.
    pub fn from_fn(lattice: TruncatedLattice<T>, f: impl Fn(usize, usize) -> Complex<T>) -> Self {
        let n = lattice.len();
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { lattice, entries }
    }

    /// Builds from columns `λ ↦ (a_{μ,λ})_μ`.
    pub fn from_columns(lattice: TruncatedLattice<T>, cols: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = lattice.len();
        if cols.len() != n || cols.iter().any(|c| c.len() != n) {
            return Err(Error::Shape(
                "column data does not match the lattice".into(),
            ));
        }
        Ok(Self::from_fn(lattice, |mu, lam| cols[lam][mu]))
    }

    pub fn lattice(&self) -> &TruncatedLattice<T> {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.len()
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, mu: usize, lam: usize) -> Complex<T> {
        self.entries[mu * self.dim() + lam]
    }

    #[inline]
    pub fn set(&mut self, mu: usize, lam: usize, z: Complex<T>) {
        let n = self.dim();
        self.entries[mu * n + lam] = z;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.lattice.clone(), |mu, lam| self.get(lam, mu))
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            lattice: self.lattice.clone(),
            entries: self.entries.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::Shape(format!(
                "vector of length {} for dimension {n}",
                x.len()
            )));
        }
        Ok(self
            .entries
            .chunks(n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `max |a − b|` over entries.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.lattice != other.lattice {
            return Err(Error::Shape("matrices live on different lattices".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    /// Little-endian container: magic, lattice descriptor `(α, β: f64, d: u32,
    /// R: f64)`, dimension `u64`, then row-major interleaved `re, im` as `f64`.
    pub fn write_bin(&self, mut w: impl Write) -> Result<()> {
        let base = self.lattice.base();
        w.write_all(MAGIC)?;
        w.write_all(&base.alpha.to_f64_lossy().to_le_bytes())?;
        w.write_all(&base.beta.to_f64_lossy().to_le_bytes())?;
        w.write_all(&(base.d as u32).to_le_bytes())?;
        w.write_all(&self.lattice.radius().to_f64_lossy().to_le_bytes())?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        for z in &self.entries {
            w.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
            w.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_bin(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Shape("not a lattice matrix container".into()));
        }
        let read8 = |r: &mut dyn Read| -> Result<[u8; 8]> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(b)
        };
        let f = |r: &mut dyn Read| read8(r).map(f64::from_le_bytes);
        let alpha = f(&mut r)?;
        let beta = f(&mut r)?;
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let d = u32::from_le_bytes(b4) as usize;
        let radius = f(&mut r)?;
        let dim = u64::from_le_bytes(read8(&mut r)?) as usize;
        let lattice = TruncatedLattice::build(T::lit(alpha), T::lit(beta), d, T::lit(radius))?;
        if lattice.len() != dim {
            return Err(Error::Shape(
                "lattice descriptor disagrees with the dimension".into(),
            ));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for _ in 0..dim * dim {
            let re = f(&mut r)?;
            let im = f(&mut r)?;
            entries.push(Complex::new(T::lit(re), T::lit(im)));
        }
        Self::new(lattice, entries)
    }

    /// CSV rows `λ…, μ…, ⟨χ(λ) − μ⟩, |a_{μ,λ}|` for entries above `floor`.
    pub fn write_csv(
        &self,
        mut w: impl Write,
        chi: &dyn Fn(&[T]) -> Vec<T>,
        floor: T,
    ) -> Result<()> {
        let dim = 2 * self.lattice.d();
        let lam_h: Vec<String> = (0..dim).map(|a| format!("lambda{a}")).collect();
        let mu_h: Vec<String> = (0..dim).map(|a| format!("mu{a}")).collect();
        writeln!(w, "{},{},dist,abs", lam_h.join(","), mu_h.join(","))?;
        let pts: Vec<Vec<T>> = self.lattice.points().collect();
        let images: Vec<Vec<T>> = pts.iter().map(|p| chi(p)).collect();
        for (lam, img) in images.iter().enumerate() {
            for (mu, pm) in pts.iter().enumerate() {
                let a = self.get(mu, lam).norm();
                if a <= floor {
                    continue;
                }
                let dist2: T = img.iter().zip(pm).map(|(x, y)| (*x - *y) * (*x - *y)).sum();
                let fmt = |v: &[T]| {
                    v.iter()
                        .map(|x| format!("{x}"))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                writeln!(
                    w,
                    "{},{},{},{:e}",
                    fmt(&pts[lam]),
                    fmt(pm),
                    (T::one() + dist2).sqrt(),
                    a.to_f64_lossy()
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> TruncatedLattice<f64> {
        TruncatedLattice::build(0.5, 0.5, 1, 1.0).unwrap()
    }

    #[test]
    fn identity_and_products() {
        let id = LatticeMatrix::identity(lat());
        let x: Vec<Complex<f64>> = (0..25).map(|k| Complex::new(k as f64, -1.0)).collect();
        assert_eq!(id.mul_vec(&x).unwrap(), x);
        assert_eq!(id.transpose(), id);
        assert!(id.mul_vec(&x[..3]).is_err());
    }

    #[test]
    fn binary_roundtrip() {
        let m = LatticeMatrix::from_fn(lat(), |a, b| Complex::new(a as f64, b as f64 * 0.5));
        let mut buf = Vec::new();
        m.write_bin(&mut buf).unwrap();
        let back = LatticeMatrix::<f64>::read_bin(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn csv_reports_distance_to_the_image() {
        let m = LatticeMatrix::identity(lat());
        let mut buf = Vec::new();
        m.write_csv(&mut buf, &|p: &[f64]| p.to_vec(), 1e-12)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 26);
        assert!(text
            .lines()
            .skip(1)
            .all(|l| l.split(',').nth(4) == Some("1")));
    }
}
