use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAGIC: &[u8; 8] = b"TFLABSIG";

/// Complex samples on the periodic grid `t_j = (j − N/2)·dx`, `dx = L/N`, in
/// every axis of `[−L/2, L/2)^d`. Row-major, last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal<T> {
    d: usize,
    l: T,
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> SampledSignal<T> {
    pub fn new(d: usize, l: T, n: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if d == 0 || n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "grid needs d ≥ 1 and an even N ≥ 2, got d = {d}, N = {n}"
            )));
        }
        if !(l > T::zero()) || !l.is_finite() {
            return Err(Error::Parameter(format!(
                "box side must be positive, got {l}"
            )));
        }
        let expected = n
            .checked_pow(d as u32)
            .ok_or_else(|| Error::Parameter("grid too large".into()))?;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(Self { d, l, n, data })
    }

    pub fn zeros(d: usize, l: T, n: usize) -> Result<Self> {
        let len = n.checked_pow(d as u32).unwrap_or(0);
        Self::new(d, l, n, vec![Complex::new(T::zero(), T::zero()); len])
    }

    /// Samples `f` at the grid positions.
    pub fn from_fn(d: usize, l: T, n: usize, f: impl Fn(&[T]) -> Complex<T>) -> Result<Self> {
        let mut s = Self::zeros(d, l, n)?;
        let mut pos = vec![T::zero(); d];
        for idx in 0..s.data.len() {
            s.position_into(idx, &mut pos);
            s.data[idx] = f(&pos);
        }
        Ok(s)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> T {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> T {
        self.l / T::from_usize_lossy(self.n)
    }

    /// `dx^d`
    pub fn cell(&self) -> T {
        self.dx().powi(self.d as i32)
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Same grid, new samples.
    pub fn with_data(&self, data: Vec<Complex<T>>) -> Result<Self> {
        Self::new(self.d, self.l, self.n, data)
    }

    /// Coordinate of grid index `j` along one axis.
    #[inline]
    pub fn coord(&self, j: usize) -> T {
        T::from_i64_lossy(j as i64 - (self.n / 2) as i64) * self.dx()
    }

    /// Multi-index of a flat index.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut m = vec![0; self.d];
        for a in (0..self.d).rev() {
            m[a] = idx % self.n;
            idx /= self.n;
        }
        m
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        m.iter().fold(0, |acc, &k| acc * self.n + k)
    }

    pub fn position_into(&self, mut idx: usize, out: &mut [T]) {
        for a in (0..self.d).rev() {
            out[a] = self.coord(idx % self.n);
            idx /= self.n;
        }
    }

    pub fn position(&self, idx: usize) -> Vec<T> {
        let mut p = vec![T::zero(); self.d];
        self.position_into(idx, &mut p);
        p
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && (self.l - other.l).abs() <= T::lit(1e-12) * self.l
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "incompatible grids: (d={}, L={}, N={}) vs (d={}, L={}, N={})",
                self.d, self.l, self.n, other.d, other.l, other.n
            )))
        }
    }

    /// `⟨f, g⟩ = dx^d Σ f·conj(g)`
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_grid(other)?;
        Ok(crate::scalar::dot_conj(&self.data, &other.data) * self.cell())
    }

    pub fn norm_sq(&self) -> T {
        crate::scalar::l2_norm_sq(&self.data) * self.cell()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Rescales to unit `L²` norm; errors on the zero signal.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > T::zero()) {
            return Err(Error::Parameter("cannot normalize the zero signal".into()));
        }
        Ok(self.scaled(Complex::new(T::one() / n, T::zero())))
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut s = self.clone();
        s.data.iter_mut().for_each(|z| *z *= c);
        s
    }

    /// `self + c·other`
    pub fn axpy(&self, c: Complex<T>, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let mut s = self.clone();
        s.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += c * b);
        Ok(s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(Complex::new(-T::one(), T::zero()), other)
    }

    pub fn conj(&self) -> Self {
        let mut s = self.clone();
        s.data.iter_mut().for_each(|z| *z = z.conj());
        s
    }

    /// Fraction of `L²` mass in the boundary shell `|t|_∞ ≥ (3/8)L`.
    pub fn tail_indicator(&self) -> T {
        let edge = T::lit(0.375) * self.l;
        let mut pos = vec![T::zero(); self.d];
        let mut shell = T::zero();
        let mut total = T::zero();
        for (idx, z) in self.data.iter().enumerate() {
            self.position_into(idx, &mut pos);
            let w = z.norm_sqr();
            total += w;
            if pos.iter().any(|x| x.abs() >= edge) {
                shell += w;
            }
        }
        if total > T::zero() {
            shell / total
        } else {
            T::zero()
        }
    }

    /// Little-endian container: magic, `d: u32`, `L: f64`, `N: u64`, then
    /// interleaved `re, im` as `f64`.
    pub fn write_bin(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.d as u32).to_le_bytes())?;
        w.write_all(&self.l.to_f64_lossy().to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
            w.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_bin(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Shape("not a signal container".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let d = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let l = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let len = n
            .checked_pow(d as u32)
            .ok_or_else(|| Error::Shape("corrupt header".into()))?;
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            data.push(Complex::new(T::lit(re), T::lit(im)));
        }
        Self::new(d, T::lit(l), n, data)
    }

    /// CSV with one row per sample: positions, `re`, `im`, `abs`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let head: Vec<String> = (0..self.d).map(|a| format!("t{a}")).collect();
        writeln!(w, "{},re,im,abs", head.join(","))?;
        let mut pos = vec![T::zero(); self.d];
        for (idx, z) in self.data.iter().enumerate() {
            self.position_into(idx, &mut pos);
            let p: Vec<String> = pos.iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{},{},{},{}", p.join(","), z.re, z.im, z.norm())?;
        }
        Ok(())
    }
}
