//! Linear affine coupling networks from exact factorizations.
//!
//! A coupling layer keeps one half of `x = (x_left, x_right)` fixed and
//! updates the other: `x_a ← x_a ⊙ exp(s) + W·x_p`. As matrices these are
//! exactly the block layers, so a six-layer GL factorization of a matrix
//! with positive determinant is a depth-six network.
//!
//! Factoring happens over ℚ: every finite float is a dyadic rational, and
//! only the emitted `s` and `W` are rounded back to f64.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::factor::{
    six_layer_factor_gl_tuned, six_layer_factor_sl_tuned, BlockLayer, Factorization,
    FactorizationKind,
};
use crate::fields::{rational_to_f64, Elem, Field};
use crate::matkit::Matrix;

/// Conjugators compared per factorization; see
/// [`crate::factor::five_layer_factor_tuned`].
pub const CANDIDATES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mask {
    /// The left half is updated.
    Left,
    /// The right half is updated.
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingLayer {
    pub mask: Mask,
    /// Log-scales for the active half.
    pub s: Vec<f64>,
    /// Active-half x passive-half shift matrix.
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the exact source matrix, hex.
    pub source_sha256: String,
    pub kind: FactorizationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingNetwork {
    pub split: (usize, usize),
    /// Applied first to last.
    pub layers: Vec<CouplingLayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagStrategy {
    /// `D = diag(det M, 1, …, 1)`.
    #[default]
    Corner,
    /// `D ≈ diag(r, …, r, det M / r^{n−1})` with `r ≈ (det M)^{1/n}`.
    Balanced,
}

/// Largest numerator and denominator bit lengths over all layer entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BitSizeReport {
    pub max_numerator_bits: u64,
    pub max_denominator_bits: u64,
}

/// The exact rational value of every entry.
pub fn lift_to_rational(m: &Matrix) -> Result<Matrix> {
    match m.field() {
        Field::Rational => Ok(m.clone()),
        Field::F64 => {
            let mut rows = Vec::with_capacity(m.rows());
            for i in 0..m.rows() {
                let mut row = Vec::with_capacity(m.cols());
                for j in 0..m.cols() {
                    let x = Field::F64.to_f64(m.get(i, j))?;
                    let q = BigRational::from_float(x).ok_or(Error::NonFiniteEntry(i, j))?;
                    row.push(Elem::Rational(q));
                }
                rows.push(row);
            }
            Matrix::from_rows(Field::Rational, rows)
        }
        other => Err(Error::UnsupportedField(other)),
    }
}

fn source_hash(m: &Matrix) -> String {
    let mut h = Sha256::new();
    h.update(format!("{}x{}:", m.rows(), m.cols()).as_bytes());
    for e in m.entries() {
        h.update(m.field().format_elem(e).as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn half(m: &Matrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.rows().is_multiple_of(2) {
        return Err(Error::OddDimension(m.rows()));
    }
    Ok(m.rows() / 2)
}

fn rational(e: &Elem) -> &BigRational {
    match e {
        Elem::Rational(q) => q,
        other => panic!("expected a rational entry, got {other:?}"),
    }
}

/// Positive diagonal entries multiplying to `det`.
pub fn choose_diag(
    det: &BigRational,
    n: usize,
    strategy: DiagStrategy,
) -> Result<Vec<BigRational>> {
    if !det.is_positive() {
        return Err(Error::OrientationError(format!(
            "det = {det} is not positive"
        )));
    }
    let mut d = vec![BigRational::one(); n];
    match strategy {
        DiagStrategy::Corner => d[0] = det.clone(),
        DiagStrategy::Balanced => {
            let root = rational_to_f64(det).powf(1.0 / n as f64);
            let r = BigRational::from_float(root)
                .filter(|r| r.is_positive())
                .unwrap_or_else(BigRational::one);
            let mut rest = det.clone();
            for entry in d.iter_mut().take(n - 1) {
                *entry = r.clone();
                rest /= &r;
            }
            d[n - 1] = rest;
        }
    }
    Ok(d)
}

/// Depth-six network for `M` with `det M > 0`, factored exactly over ℚ.
pub fn to_coupling_network(
    m: &Matrix,
    strategy: DiagStrategy,
) -> Result<(CouplingNetwork, Factorization)> {
    let n = half(m)?;
    let q = lift_to_rational(m)?;
    let det = q.det()?.into_elem();
    let d: Vec<Elem> = choose_diag(rational(&det), n, strategy)?
        .into_iter()
        .map(Elem::Rational)
        .collect();
    let f = six_layer_factor_gl_tuned(&q, &d, CANDIDATES)?;
    let mut net = network_from_factorization(&f)?;
    net.provenance = Some(Provenance {
        source_sha256: source_hash(&q),
        kind: f.kind,
    });
    Ok((net, f))
}

/// Volume-preserving network (every `s = 0`) for `det M = 1`.
pub fn nice_network(m: &Matrix) -> Result<(CouplingNetwork, Factorization)> {
    half(m)?;
    let q = lift_to_rational(m)?;
    let f = six_layer_factor_sl_tuned(&q, CANDIDATES)?;
    let mut net = network_from_factorization(&f)?;
    net.provenance = Some(Provenance {
        source_sha256: source_hash(&q),
        kind: f.kind,
    });
    Ok((net, f))
}

fn to_floats(a: &Matrix) -> Result<Vec<Vec<f64>>> {
    let f = a.field();
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|e| f.to_f64(e)).collect())
        .collect()
}

/// Converts an exact factorization `F₁ ⋯ F_k` into the network applying
/// `F_k` first.
pub fn network_from_factorization(f: &Factorization) -> Result<CouplingNetwork> {
    f.validate()?;
    let mut layers = Vec::with_capacity(f.layers.len());
    for layer in f.layers.iter().rev() {
        let (mask, s) = match layer {
            BlockLayer::Lower(_) => (Mask::Right, vec![0.0; f.n]),
            BlockLayer::Upper(_) => (Mask::Left, vec![0.0; f.m]),
            BlockLayer::UpperDiag { d, .. } => {
                let mut s = Vec::with_capacity(d.len());
                for e in d {
                    let x = f.field.to_f64(e)?;
                    if x.is_nan() || x <= 0.0 {
                        return Err(Error::OrientationError(format!(
                            "scale {} is not positive",
                            f.field.format_elem(e)
                        )));
                    }
                    s.push(x.ln());
                }
                (Mask::Left, s)
            }
        };
        layers.push(CouplingLayer {
            mask,
            s,
            w: to_floats(layer.block())?,
        });
    }
    Ok(CouplingNetwork {
        split: (f.m, f.n),
        layers,
        provenance: None,
    })
}

impl CouplingLayer {
    /// The float matrix of this layer acting on column vectors.
    pub fn to_matrix(&self, m: usize, n: usize) -> Result<Matrix> {
        let (active, passive, a0, p0) = match self.mask {
            Mask::Left => (m, n, 0, m),
            Mask::Right => (n, m, m, 0),
        };
        if self.s.len() != active
            || self.w.len() != active
            || self.w.iter().any(|r| r.len() != passive)
        {
            return Err(Error::DimensionMismatch(format!(
                "layer shapes do not fit split ({m}, {n})"
            )));
        }
        let f = Field::F64;
        let mut out = Matrix::identity(f, m + n);
        for i in 0..active {
            let scale = self.s[i].exp();
            if !scale.is_finite() {
                return Err(Error::NonFiniteEntry(a0 + i, a0 + i));
            }
            out.set(a0 + i, a0 + i, Elem::Float(scale));
            for j in 0..passive {
                let x = self.w[i][j];
                if !x.is_finite() {
                    return Err(Error::NonFiniteEntry(a0 + i, p0 + j));
                }
                out.set(a0 + i, p0 + j, Elem::Float(x));
            }
        }
        Ok(out)
    }
}

impl CouplingNetwork {
    /// Structural checks: depth at most six, alternating masks, at most one
    /// layer with a nonzero scale.
    pub fn validate(&self) -> Result<()> {
        if self.layers.len() > 6 {
            return Err(Error::MalformedFactorization(format!(
                "depth {} exceeds 6",
                self.layers.len()
            )));
        }
        if self.layers.windows(2).any(|w| w[0].mask == w[1].mask) {
            return Err(Error::MalformedFactorization(
                "masks do not alternate".into(),
            ));
        }
        let scaled = self
            .layers
            .iter()
            .filter(|l| l.s.iter().any(|&x| x != 0.0))
            .count();
        if scaled > 1 {
            return Err(Error::MalformedFactorization(format!(
                "{scaled} layers carry a scale"
            )));
        }
        Ok(())
    }

    /// Float product `N_k ⋯ N_1` of the layer matrices.
    pub fn evaluate(&self) -> Result<Matrix> {
        let (m, n) = self.split;
        let mut acc = Matrix::identity(Field::F64, m + n);
        for layer in &self.layers {
            acc = layer.to_matrix(m, n)?.checked_mul(&acc)?;
        }
        Ok(acc)
    }
}

fn to_f64_matrix(m: &Matrix) -> Result<Matrix> {
    let f = m.field();
    let entries: Vec<Elem> = m
        .entries()
        .iter()
        .map(|e| f.to_f64(e).map(Elem::Float))
        .collect::<Result<_>>()?;
    Ok(Matrix::from_fn(Field::F64, m.rows(), m.cols(), |i, j| {
        entries[i * m.cols() + j].clone()
    }))
}

/// `‖M̂ − M‖_∞ / max(1, ‖M‖_∞)` for the network product `M̂`.
pub fn reconstruction_error(net: &CouplingNetwork, m: &Matrix) -> Result<f64> {
    let (a, b) = net.split;
    if m.rows() != a + b || m.cols() != a + b {
        return Err(Error::DimensionMismatch(format!(
            "network acts on size {}, matrix is {}x{}",
            a + b,
            m.rows(),
            m.cols()
        )));
    }
    let target = to_f64_matrix(m)?;
    let diff = net.evaluate()?.checked_sub(&target)?;
    Ok(diff.norm_inf()? / target.norm_inf()?.max(1.0))
}

/// Entry growth of an exact rational factorization.
pub fn bit_size_report(f: &Factorization) -> BitSizeReport {
    let mut report = BitSizeReport::default();
    let mut see = |e: &Elem| {
        if let Elem::Rational(q) = e {
            report.max_numerator_bits = report.max_numerator_bits.max(q.numer().bits());
            report.max_denominator_bits = report.max_denominator_bits.max(q.denom().bits());
        }
    };
    for layer in &f.layers {
        layer.block().entries().iter().for_each(&mut see);
        if let BlockLayer::UpperDiag { d, .. } = layer {
            d.iter().for_each(&mut see);
        }
    }
    report
}

/// `true` for a dyadic rational `a / 2^k`.
pub fn is_dyadic(q: &BigRational) -> bool {
    let d: &BigInt = q.denom();
    !d.is_zero() && (d & (d - BigInt::one())).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn float_matrix(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(
            Field::F64,
            rows.iter()
                .map(|r| r.iter().map(|&x| Elem::Float(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    /// Independent decoding of the IEEE-754 bit pattern.
    fn decode_ieee(x: f64) -> BigRational {
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | 1 << 52, exp - 1075)
        };
        let mant = BigRational::from_integer(BigInt::from(sign) * BigInt::from(mant));
        let two = BigRational::from_integer(BigInt::from(2));
        if e >= 0 {
            mant * num_traits::pow(two, e as usize)
        } else {
            mant / num_traits::pow(two, (-e) as usize)
        }
    }

    #[test]
    fn lift_examples() {
        let q = lift_to_rational(&float_matrix(&[&[0.5, 0.1]])).unwrap();
        assert_eq!(Field::Rational.format_elem(q.get(0, 0)), "1/2");
        assert_eq!(
            Field::Rational.format_elem(q.get(0, 1)),
            "3602879701896397/36028797018963968"
        );
        assert_eq!(
            lift_to_rational(&float_matrix(&[&[1.0, f64::NAN]])),
            Err(Error::NonFiniteEntry(0, 1))
        );
        assert!(lift_to_rational(&float_matrix(&[&[f64::INFINITY]])).is_err());
    }

    #[test]
    fn lift_matches_ieee_decoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let specials = [0.1, -0.0, 5e-324, f64::MAX, f64::MIN_POSITIVE, 1.0 / 3.0];
        let mut xs: Vec<f64> = specials.to_vec();
        xs.extend(
            (0..500)
                .map(|_| f64::from_bits(rng.gen::<u64>()))
                .filter(|x| x.is_finite()),
        );
        for x in xs {
            let q = lift_to_rational(&float_matrix(&[&[x]])).unwrap();
            let want = decode_ieee(x);
            assert_eq!(*rational(q.get(0, 0)), want, "{x:e}");
            assert!(is_dyadic(&want));
            assert_eq!(rational_to_f64(&want), x);
        }
    }

    #[test]
    fn identity_network() {
        let id = Matrix::identity(Field::F64, 4);
        let (net, _) = to_coupling_network(&id, DiagStrategy::Corner).unwrap();
        assert!(net.layers.len() <= 6);
        net.validate().unwrap();
        assert_eq!(reconstruction_error(&net, &id).unwrap(), 0.0);
        let (nice, _) = nice_network(&Matrix::identity(Field::Rational, 4)).unwrap();
        assert!(nice.layers.iter().all(|l| l.s.iter().all(|&x| x == 0.0)));
        assert!(nice
            .layers
            .iter()
            .all(|l| l.w.iter().flatten().all(|&x| x == 0.0)));
    }

    #[test]
    fn block_swap() {
        let swap = float_matrix(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
        ]);
        let (net, _) = to_coupling_network(&swap, DiagStrategy::Corner).unwrap();
        assert_eq!(net.layers.len(), 6);
        net.validate().unwrap();
        assert!(reconstruction_error(&net, &swap).unwrap() <= 1e-9);
    }

    #[test]
    fn orientation_and_unimodularity() {
        let flip = float_matrix(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
        ]);
        assert!(matches!(
            to_coupling_network(&flip, DiagStrategy::Corner),
            Err(Error::OrientationError(_))
        ));
        let two = Matrix::diagonal(
            Field::Rational,
            &[Field::Rational.from_int(2), Field::Rational.one()],
        );
        assert!(matches!(nice_network(&two), Err(Error::NotUnimodular(_))));
        assert_eq!(
            to_coupling_network(&Matrix::identity(Field::F64, 3), DiagStrategy::Corner),
            Err(Error::OddDimension(3))
        );
    }

    #[test]
    fn reconstruction_dims() {
        let (net, _) =
            to_coupling_network(&Matrix::identity(Field::F64, 4), DiagStrategy::Corner).unwrap();
        assert!(matches!(
            reconstruction_error(&net, &Matrix::identity(Field::F64, 6)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn nice_random_sl4_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = Field::Rational;
        for _ in 0..10 {
            let m = loop {
                let m = Matrix::from_fn(q, 4, 4, |_, _| q.from_int(rng.gen_range(-3..=3)));
                if m.det().unwrap().is_one() {
                    break m;
                }
            };
            let (net, f) = nice_network(&m).unwrap();
            assert_eq!(net.layers.len(), 6);
            assert!(net.layers.iter().all(|l| l.s.iter().all(|&x| x == 0.0)));
            assert_eq!(f.evaluate().unwrap(), m);
            let dets = f
                .layers
                .iter()
                .fold(q.one(), |acc, l| q.mul(&acc, &l.det(q)));
            assert!(q.is_one(&dets));
        }
    }

    #[test]
    fn balanced_diag_multiplies_to_det() {
        let det = BigRational::new(BigInt::from(7), BigInt::from(3));
        for n in 1..5 {
            let d = choose_diag(&det, n, DiagStrategy::Balanced).unwrap();
            assert!(d.iter().all(|x| x.is_positive()));
            assert_eq!(d.iter().fold(BigRational::one(), |a, x| a * x), det);
        }
        assert!(choose_diag(&BigRational::zero(), 2, DiagStrategy::Corner).is_err());
    }

    #[test]
    fn rounding_bound_for_small_entries() {
        // Evaluating in ℚ and rounding once moves each entry below 2^10 by
        // at most half an ulp, 2^-43.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let m = Matrix::from_fn(Field::F64, 4, 4, |i, j| {
                Elem::Float(if i == j {
                    2.0
                } else {
                    rng.gen_range(-0.3..0.3)
                })
            });
            let (net, f) = to_coupling_network(&m, DiagStrategy::Corner).unwrap();
            let rounded = to_f64_matrix(&f.evaluate().unwrap()).unwrap();
            let err = rounded.checked_sub(&m).unwrap().norm_inf().unwrap()
                / m.norm_inf().unwrap().max(1.0);
            assert!(err <= 2f64.powi(-40), "{err}");
            assert!(reconstruction_error(&net, &m).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn network_json_round_trip() {
        let (net, _) =
            to_coupling_network(&Matrix::identity(Field::F64, 2), DiagStrategy::Corner).unwrap();
        let text = serde_json::to_string(&net).unwrap();
        let back: CouplingNetwork = serde_json::from_str(&text).unwrap();
        assert_eq!(back, net);
    }
}
