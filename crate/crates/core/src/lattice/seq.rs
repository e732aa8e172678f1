use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Coords, TruncatedLattice};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lebesgue exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::Parameter(format!("exponent {p} outside [1, inf]")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(p) => p,
            Self::Infinity => f64::INFINITY,
        }
    }

    /// `1/p` with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Self::Finite(p) => 1.0 / p,
            Self::Infinity => 0.0,
        }
    }

    /// Norm of a list of nonnegative magnitudes.
    pub fn norm<T: Real>(self, vals: impl Iterator<Item = T>) -> T {
        match self {
            Self::Infinity => vals.fold(T::zero(), T::max),
            Self::Finite(1.0) => vals.sum(),
            Self::Finite(p) => {
                let pt = T::lit(p);
                // scale by the max to avoid overflow for large p
                let v: Vec<T> = vals.collect();
                let top = v.iter().copied().fold(T::zero(), T::max);
                if top == T::zero() {
                    return T::zero();
                }
                let s: T = v.iter().map(|&x| (x / top).powf(pt)).sum();
                top * s.powf(T::one() / pt)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("cannot parse exponent {s:?}")))
                .and_then(Self::new),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(p) => s.serialize_f64(*p),
            Self::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// `(Σ_j (Σ_i |x_{ij}|^p)^{q/p})^{1/q}` for magnitudes grouped by the outer index `j`.
pub fn lpq_norm_groups<T: Real>(groups: &[Vec<T>], p: Exponent, q: Exponent) -> T {
    q.norm(groups.iter().map(|g| p.norm(g.iter().copied())))
}

/// Weighted mixed norm of a sequence on `Λ_R`: inner index over the time
/// coordinates, outer index over the frequency coordinates. `m = None` is `m ≡ 1`.
pub fn lpq_norm<T: Real>(
    x: &[Complex<T>],
    lat: &TruncatedLattice<T>,
    p: Exponent,
    q: Exponent,
    m: Option<&[T]>,
) -> Result<T> {
    if x.len() != lat.len() {
        return Err(Error::Shape(format!(
            "sequence has {} entries, lattice section has {}",
            x.len(),
            lat.len()
        )));
    }
    if let Some(w) = m {
        if w.len() != x.len() {
            return Err(Error::Shape(
                "weight table length differs from sequence".into(),
            ));
        }
    }
    let (_, fb) = lat.bounds();
    let groups_n = ((2 * fb + 1) as usize).pow(lat.d() as u32);
    // lexicographic order puts frequency coordinates last, so j = index mod groups_n
    let mut groups = vec![Vec::with_capacity(x.len() / groups_n); groups_n];
    for (idx, z) in x.iter().enumerate() {
        let w = m.map_or(T::one(), |w| w[idx]);
        groups[idx % groups_n].push(z.norm() * w);
    }
    Ok(lpq_norm_groups(&groups, p, q))
}

/// Integer coordinates of a translation `γ ∈ Λ`, or a parameter error.
pub fn translate_coords<T: Real>(lat: &TruncatedLattice<T>, gamma: &[T]) -> Result<Coords> {
    lat.base().coords_of(gamma)
}

/// `(T_γ x)_λ = x_{λ−γ}` on `Λ_R`; entries pushed outside the section are
/// dropped and counted in the second return value (nonzero entries only).
pub fn translate_seq<T: Real>(
    x: &[Complex<T>],
    lat: &TruncatedLattice<T>,
    gamma: &[i64],
) -> Result<(Vec<Complex<T>>, usize)> {
    if x.len() != lat.len() || gamma.len() != 2 * lat.d() {
        return Err(Error::Shape("translation shape mismatch".into()));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; x.len()];
    let mut lost = 0;
    for (idx, &z) in x.iter().enumerate() {
        let target = super::add_coords(&lat.coords(idx), gamma);
        match lat.index_of(&target) {
            Some(t) => out[t] = z,
            None if z != zero => lost += 1,
            None => {}
        }
    }
    Ok((out, lost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn hand_computed_mixed_norm() {
        // inner sums over i: j=1 -> 1+3 = 4, j=2 -> 2+4 = 6
        let groups = vec![vec![1.0, 3.0], vec![2.0, 4.0]];
        let v = lpq_norm_groups(&groups, Exponent::Finite(1.0), Exponent::Infinity);
        assert_eq!(v, 6.0);
    }

    #[test]
    fn spike_norm_is_its_weight() {
        let lat = TruncatedLattice::build(1.0, 1.0, 1, 2.0).unwrap();
        let w: Vec<f64> = (0..lat.len()).map(|i| 1.0 + i as f64).collect();
        let mut x = vec![c(0.0); lat.len()];
        x[7] = c(1.0);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            for q in [1.0, 2.0, f64::INFINITY] {
                let n = lpq_norm(
                    &x,
                    &lat,
                    Exponent::new(p).unwrap(),
                    Exponent::new(q).unwrap(),
                    Some(&w),
                )
                .unwrap();
                assert!((n - 8.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn groups_follow_frequency_coordinates() {
        let lat = TruncatedLattice::build(1.0, 1.0, 1, 1.0).unwrap();
        // x = 1 on the slab m = 1, so the inner l1 sums are 0, 0, 3
        let x: Vec<Complex<f64>> = (0..lat.len())
            .map(|i| {
                if lat.coords(i)[1] == 1 {
                    c(1.0)
                } else {
                    c(0.0)
                }
            })
            .collect();
        let n = lpq_norm(&x, &lat, Exponent::Finite(1.0), Exponent::Infinity, None).unwrap();
        assert_eq!(n, 3.0);
        let n = lpq_norm(&x, &lat, Exponent::Infinity, Exponent::Finite(1.0), None).unwrap();
        assert_eq!(n, 1.0);
    }

    #[test]
    fn exponents_are_validated() {
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(e, Exponent::Infinity);
        let e: Exponent = serde_json::from_str("2").unwrap();
        assert_eq!(e, Exponent::Finite(2.0));
        assert!(serde_json::from_str::<Exponent>("0").is_err());
    }

    #[test]
    fn spike_translation_and_loss() {
        let lat = TruncatedLattice::build(1.0, 1.0, 1, 2.0).unwrap();
        let mut x = vec![c(0.0); lat.len()];
        let at = lat.index_of(&[1, 0]).unwrap();
        x[at] = c(2.0);
        let (y, lost) = translate_seq(&x, &lat, &[0, -1]).unwrap();
        assert_eq!(lost, 0);
        assert_eq!(y[lat.index_of(&[1, -1]).unwrap()], c(2.0));
        let (_, lost) = translate_seq(&x, &lat, &[2, 0]).unwrap();
        assert_eq!(lost, 1);
        let (y, _) = translate_seq(&x, &lat, &[0, 0]).unwrap();
        assert_eq!(y, x);
        assert!(translate_coords(&lat, &[0.5, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn p_equals_q_is_plain_lp(vals in proptest::collection::vec(-5.0f64..5.0, 25), p in 1.0f64..6.0) {
            let lat = TruncatedLattice::build(1.0, 1.0, 1, 2.0).unwrap();
            let x: Vec<Complex<f64>> = vals.iter().map(|&v| c(v)).collect();
            let e = Exponent::new(p).unwrap();
            let mixed = lpq_norm(&x, &lat, e, e, None).unwrap();
            let plain: f64 = vals.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
            prop_assert!((mixed - plain).abs() <= 1e-12 * plain.max(1.0));
        }

        #[test]
        fn translations_compose(
            vals in proptest::collection::vec(-1.0f64..1.0, 9),
            g1 in (-2i64..=2, -2i64..=2),
            g2 in (-2i64..=2, -2i64..=2),
        ) {
            // support in {|k| ≤ 1} and shifts of size ≤ 2 each stay inside radius 5
            let lat = TruncatedLattice::build(1.0, 1.0, 1, 5.0).unwrap();
            let mut x = vec![c(0.0); lat.len()];
            for (k, v) in vals.iter().enumerate() {
                let co = [k as i64 / 3 - 1, k as i64 % 3 - 1];
                x[lat.index_of(&co).unwrap()] = c(*v);
            }
            let (a, _) = translate_seq(&x, &lat, &[g1.0, g1.1]).unwrap();
            let (ab, _) = translate_seq(&a, &lat, &[g2.0, g2.1]).unwrap();
            let (s, _) = translate_seq(&x, &lat, &[g1.0 + g2.0, g1.1 + g2.1]).unwrap();
            prop_assert_eq!(ab, s);
        }

        #[test]
        fn translation_norm_bound(
            vals in proptest::collection::vec(-1.0f64..1.0, 9),
            g in (-3i64..=3, -3i64..=3),
            s in 0.0f64..3.0,
            p in 1.0f64..4.0,
        ) {
            let lat = TruncatedLattice::build(1.0, 1.0, 1, 5.0).unwrap();
            let v = crate::lattice::WeightSpec::polynomial(s);
            let w: Vec<f64> = lat.points().map(|pt| v.eval(&pt)).collect();
            let mut x = vec![c(0.0); lat.len()];
            for (k, val) in vals.iter().enumerate() {
                let co = [k as i64 / 3 - 1, k as i64 % 3 - 1];
                x[lat.index_of(&co).unwrap()] = c(*val);
            }
            let e = Exponent::new(p).unwrap();
            let (y, lost) = translate_seq(&x, &lat, &[g.0, g.1]).unwrap();
            prop_assert_eq!(lost, 0);
            let before = lpq_norm(&x, &lat, e, e, Some(&w)).unwrap();
            let after = lpq_norm(&y, &lat, e, e, Some(&w)).unwrap();
            let vg = v.eval(&[g.0 as f64, g.1 as f64]);
            let cm = v.known_moderate_constant(&v).unwrap();
            prop_assert!(after <= cm * vg * before * (1.0 + 1e-12) + 1e-14);
        }
    }
}
