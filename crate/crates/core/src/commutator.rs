//! Writing a determinant-one matrix as a single commutator
//! `[X, Y] = X⁻¹ Y⁻¹ X Y` with `X, Y` invertible.
//!
//! The search is a ladder of strategies, each of which produces a pair that
//! is re-checked exactly before it is returned:
//!
//! 1. Scalar targets `ωI` (with `ω^k = 1`): a cyclic permutation `X` and
//!    `Y = diag(1, ω, …, ω^{k-1})`, for which `Y⁻¹XY = ωX`.
//! 2. Triangular route. Conjugate the target to `M' = P⁻¹MP` and factor
//!    `M' = LU` without pivoting. Rescaling by a diagonal `Δ` with
//!    `δ₁ = 1`, `δ_{i+1} = δ_i / u_i` gives `M' = (LΔ)(Δ⁻¹U)` where
//!    `(LΔ)⁻¹` and `Δ⁻¹U` have the same diagonal up to a cyclic shift.
//!    When `L` has a nonzero subdiagonal and `U` a nonzero superdiagonal,
//!    both factors are cyclic (nonderogatory) with equal characteristic
//!    polynomials, hence similar; the Krylov bases of the two give `Y`.
//! 3. Finite fields only: random `X` until `X` and `XM` are cyclic with
//!    equal characteristic polynomials, then `Y` from Krylov bases.
//! 4. Finite fields with a tiny `GL_k`: exhaustive search over all pairs,
//!    which is the only step able to prove that no pair exists.
//!
//! Candidate order is seeded by a hash of the target, so results are
//! reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::{Elem, Field, FieldValue};
use crate::matkit::Matrix;

/// Candidate budget shared by the randomized strategies.
pub const DEFAULT_BUDGET: usize = 10_000;

/// Exhaustive pair search runs when `|GL_k(q)|² ≤` this bound.
const EXHAUSTIVE_PAIR_LIMIT: u64 = 1 << 22;

/// Invertible `X`, `Y` with `X⁻¹Y⁻¹XY` equal to the target.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorPair {
    pub x: Matrix,
    pub y: Matrix,
}

/// `X⁻¹ Y⁻¹ X Y`.
pub fn commutator(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    let xi = x.inverse()?;
    let yi = y.inverse()?;
    let xy = x.checked_mul(y)?;
    xi.checked_mul(&yi)?.checked_mul(&xy)
}

/// Stable hash of a matrix, used to seed candidate enumeration.
pub fn matrix_seed(m: &Matrix) -> u64 {
    let mut h = Sha256::new();
    h.update(m.field().to_string().as_bytes());
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for e in m.entries() {
        h.update(m.field().format_elem(e).as_bytes());
        h.update([0u8]);
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn commutator_decompose(m: &Matrix) -> Result<CommutatorPair> {
    commutator_decompose_with_budget(m, DEFAULT_BUDGET)
}

pub fn commutator_decompose_with_budget(m: &Matrix, budget: usize) -> Result<CommutatorPair> {
    let field = m.field();
    field.require_exact()?;
    let det = m.det()?;
    if !det.is_one() {
        return Err(Error::NotUnimodular(det.to_string()));
    }
    let k = m.rows();
    let verified = |pair: CommutatorPair| -> Result<CommutatorPair> {
        if commutator(&pair.x, &pair.y)? == *m {
            Ok(pair)
        } else {
            Err(Error::VerificationFailed(
                "commutator pair does not reproduce target".into(),
            ))
        }
    };

    if let Some(omega) = m.scalar_value() {
        return verified(scalar_pair(field, k, &omega));
    }
    if k == 0 {
        return verified(CommutatorPair {
            x: m.clone(),
            y: m.clone(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(matrix_seed(m));
    let tri_budget = budget / 2;
    for attempt in 0..tri_budget {
        let p = if attempt == 0 {
            Matrix::identity(field, k)
        } else {
            random_conjugator(field, k, &mut rng)
        };
        if let Some(pair) = triangular_route(m, &p, &mut rng)? {
            return verified(pair);
        }
    }

    if field.order().is_some() {
        for _ in tri_budget..budget {
            let x = Matrix::random_invertible(field, k, &mut rng);
            if let Some(pair) = similar_product_route(m, x, &mut rng)? {
                return verified(pair);
            }
        }
        if let Some(group) = small_general_linear_group(field, k) {
            let n = group.len() as u64;
            if n * n <= EXHAUSTIVE_PAIR_LIMIT {
                return match exhaustive_pair(m, &group)? {
                    Some(pair) => verified(pair),
                    None => Err(Error::NoDecomposition { size: k, field }),
                };
            }
        }
    }
    Err(Error::DecompositionFailed(budget))
}

/// The triangular route for one fixed conjugator `P`: `None` when
/// `P⁻¹MP` lacks the LU shape it needs. Works over f64 too, which is how
/// candidate conjugators are compared cheaply.
pub fn conjugated_pair(m: &Matrix, p: &Matrix) -> Result<Option<CommutatorPair>> {
    if !m.is_square() || m.rows() == 0 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(matrix_seed(m));
    triangular_route(m, p, &mut rng)
}

/// The identity followed by `count − 1` matrices with entries in `−2..=2`
/// and determinant `±1`, so that conjugating keeps denominators small.
/// Seeded from `m`.
pub fn small_conjugators(m: &Matrix, count: usize) -> Vec<Matrix> {
    let field = m.field();
    let k = m.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(matrix_seed(m) ^ 0x5eed);
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        out.push(Matrix::identity(field, k));
    }
    while out.len() < count {
        let p = Matrix::from_fn(field, k, k, |_, _| field.from_int(rng.gen_range(-2..=2)));
        let det = p.det().map(FieldValue::into_elem);
        if det.is_ok_and(|d| field.is_one(&d) || field.is_one(&field.neg(&d))) {
            out.push(p);
        }
    }
    out
}

/// `X` is the cyclic shift with ones on the superdiagonal and in the
/// bottom-left corner, `Y = diag(1, ω, ω², …)`.
fn scalar_pair(field: Field, k: usize, omega: &Elem) -> CommutatorPair {
    let mut x = Matrix::zeros(field, k, k);
    for j in 0..k {
        x.set((j + k - 1) % k, j, field.one());
    }
    let powers: Vec<Elem> = (0..k).map(|i| field.pow(omega, i as u64)).collect();
    CommutatorPair {
        x,
        y: Matrix::diagonal(field, &powers),
    }
}

fn random_conjugator<R: Rng>(field: Field, k: usize, rng: &mut R) -> Matrix {
    match field {
        // Small integers keep the rational entries from growing.
        Field::Rational => loop {
            let p = Matrix::from_fn(field, k, k, |_, _| field.from_int(rng.gen_range(-2..=2)));
            if p.is_invertible() {
                return p;
            }
        },
        _ => Matrix::random_invertible(field, k, rng),
    }
}

/// Doolittle factorization without pivoting: unit lower `L`, upper `U`.
pub(crate) fn lu_no_pivot(a: &Matrix) -> Option<(Matrix, Matrix)> {
    let f = a.field();
    let n = a.rows();
    let mut u = a.clone();
    let mut l = Matrix::identity(f, n);
    for k in 0..n {
        let piv = u.get(k, k).clone();
        if f.is_zero(&piv) {
            return None;
        }
        let inv = f.inv(&piv).ok()?;
        for i in k + 1..n {
            let factor = f.mul(u.get(i, k), &inv);
            if f.is_zero(&factor) {
                continue;
            }
            for j in k..n {
                let e = f.sub(u.get(i, j), &f.mul(&factor, u.get(k, j)));
                u.set(i, j, e);
            }
            l.set(i, k, factor);
        }
    }
    Some((l, u))
}

/// Columns `v, Av, …, A^{k-1}v`.
fn krylov(a: &Matrix, v: Vec<Elem>) -> Matrix {
    let k = a.rows();
    let mut cols = Vec::with_capacity(k);
    let mut cur = v;
    for _ in 0..k {
        let next = a.mul_vec(&cur);
        cols.push(cur);
        cur = next;
    }
    Matrix::from_columns(a.field(), k, &cols)
}

fn unit_vector(field: Field, k: usize, i: usize) -> Vec<Elem> {
    (0..k)
        .map(|j| if i == j { field.one() } else { field.zero() })
        .collect()
}

fn triangular_route<R: Rng>(m: &Matrix, p: &Matrix, rng: &mut R) -> Result<Option<CommutatorPair>> {
    let f = m.field();
    let k = m.rows();
    let p_inv = p.inverse()?;
    let conj = &(&p_inv * m) * p;
    let Some((l, u)) = lu_no_pivot(&conj) else {
        return Ok(None);
    };
    let chain_ok = (0..k - 1).all(|i| !f.is_zero(l.get(i + 1, i)) && !f.is_zero(u.get(i, i + 1)));
    if !chain_ok {
        return Ok(None);
    }
    let mut delta = Vec::with_capacity(k);
    delta.push(f.one());
    for i in 0..k - 1 {
        let next = f.div(&delta[i], u.get(i, i))?;
        delta.push(next);
    }
    let delta_inv: Vec<Elem> = delta.iter().map(|d| f.inv(d)).collect::<Result<_>>()?;
    let lower = &l * &Matrix::diagonal(f, &delta);
    let upper = &Matrix::diagonal(f, &delta_inv) * &u;
    let x = lower.inverse()?;
    // Both are nonderogatory with equal characteristic polynomials, so any
    // pair of cyclic vectors conjugates one onto the other. e1 and e_n
    // usually work; otherwise search.
    let kx = Some(krylov(&x, unit_vector(f, k, 0)))
        .filter(Matrix::is_invertible)
        .or_else(|| cyclic_vector(&x, rng));
    let ku = Some(krylov(&upper, unit_vector(f, k, k - 1)))
        .filter(Matrix::is_invertible)
        .or_else(|| cyclic_vector(&upper, rng));
    let (Some(kx), Some(ku)) = (kx, ku) else {
        return Ok(None);
    };
    let y = &kx * &ku.inverse()?;
    Ok(Some(CommutatorPair {
        x: &(p * &x) * &p_inv,
        y: &(p * &y) * &p_inv,
    }))
}

/// A cyclic vector of `a`, if one is found among the unit vectors and a
/// few random vectors.
fn cyclic_vector<R: Rng>(a: &Matrix, rng: &mut R) -> Option<Matrix> {
    let f = a.field();
    let k = a.rows();
    let candidates = (0..k)
        .map(|i| unit_vector(f, k, i))
        .chain((0..8).map(|_| (0..k).map(|_| f.random(rng)).collect()));
    for v in candidates {
        let kv = krylov(a, v);
        if kv.is_invertible() {
            return Some(kv);
        }
    }
    None
}

fn similar_product_route<R: Rng>(
    m: &Matrix,
    x: Matrix,
    rng: &mut R,
) -> Result<Option<CommutatorPair>> {
    let z = &x * m;
    if x.charpoly()? != z.charpoly()? {
        return Ok(None);
    }
    let (Some(kx), Some(kz)) = (cyclic_vector(&x, rng), cyclic_vector(&z, rng)) else {
        return Ok(None);
    };
    let y = &kx * &kz.inverse()?;
    Ok(Some(CommutatorPair { x, y }))
}

/// All of `GL_k(q)` when `q^{k²}` is small enough to enumerate.
fn small_general_linear_group(field: Field, k: usize) -> Option<Vec<Matrix>> {
    let elements = field.elements()?;
    let q = elements.len() as u64;
    let cells = (k * k) as u32;
    let total = q.checked_pow(cells).filter(|&t| t <= 1 << 16)?;
    let mut group = Vec::new();
    for code in 0..total {
        let mut c = code;
        let m = Matrix::from_fn(field, k, k, |_, _| {
            let e = elements[(c % q) as usize].clone();
            c /= q;
            e
        });
        if m.is_invertible() {
            group.push(m);
        }
    }
    Some(group)
}

fn exhaustive_pair(m: &Matrix, group: &[Matrix]) -> Result<Option<CommutatorPair>> {
    for x in group {
        for y in group {
            if commutator(x, y)? == *m {
                return Ok(Some(CommutatorPair {
                    x: x.clone(),
                    y: y.clone(),
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rational;

    fn special_linear_group(field: Field, k: usize) -> Vec<Matrix> {
        small_general_linear_group(field, k)
            .unwrap()
            .into_iter()
            .filter(|m| m.det().unwrap().is_one())
            .collect()
    }

    #[test]
    fn commutator_examples() {
        let i = Matrix::identity(Q, 3);
        assert!(commutator(&i, &i).unwrap().is_identity());
        let d1 = Matrix::from_ints(Q, &[&[2, 0], &[0, 3]]);
        let d2 = Matrix::from_ints(Q, &[&[5, 0], &[0, -1]]);
        assert!(commutator(&d1, &d2).unwrap().is_identity());
        let gf3 = Field::Prime(3);
        let x = Matrix::from_ints(gf3, &[&[1, 1], &[0, 1]]);
        let y = Matrix::from_ints(gf3, &[&[1, 0], &[1, 1]]);
        let c = commutator(&x, &y).unwrap();
        assert!(c.det().unwrap().is_one());
        // X⁻¹Y⁻¹ = [[2,2],[2,1]], XY = [[2,1],[1,1]].
        assert_eq!(c, Matrix::from_ints(gf3, &[&[0, 1], &[2, 0]]));
        let singular = Matrix::zeros(Q, 2, 2);
        assert_eq!(commutator(&singular, &i), Err(Error::SingularMatrix));
    }

    #[test]
    fn identity_decomposes_trivially() {
        let pair = commutator_decompose(&Matrix::identity(Q, 4)).unwrap();
        assert!(pair.x.is_invertible() && pair.y.is_invertible());
        assert!(commutator(&pair.x, &pair.y).unwrap().is_identity());
    }

    #[test]
    fn scalar_gf4() {
        let f = Field::Gf4;
        let w = f.parse_elem("w").unwrap();
        let target = Matrix::identity(f, 3).scale(&w);
        let pair = commutator_decompose(&target).unwrap();
        let w2 = f.mul(&w, &w);
        assert_eq!(pair.y, Matrix::diagonal(f, &[f.one(), w.clone(), w2]));
        assert_eq!(
            pair.x,
            Matrix::from_ints(f, &[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]])
        );
        // Y⁻¹XY = wX.
        let conj = &(&pair.y.inverse().unwrap() * &pair.x) * &pair.y;
        assert_eq!(conj, pair.x.scale(&w));
        assert_eq!(commutator(&pair.x, &pair.y).unwrap(), target);
    }

    #[test]
    fn sl2_gf2_exceptions_match_brute_force() {
        let gf2 = Field::Prime(2);
        let exceptions = [
            Matrix::from_ints(gf2, &[&[1, 1], &[0, 1]]),
            Matrix::from_ints(gf2, &[&[1, 0], &[1, 1]]),
            Matrix::from_ints(gf2, &[&[0, 1], &[1, 0]]),
        ];
        let group = special_linear_group(gf2, 2);
        assert_eq!(group.len(), 6);
        for m in &group {
            let result = commutator_decompose(m);
            if exceptions.contains(m) {
                assert_eq!(
                    result,
                    Err(Error::NoDecomposition {
                        size: 2,
                        field: gf2
                    })
                );
            } else {
                let pair = result.unwrap();
                assert_eq!(commutator(&pair.x, &pair.y).unwrap(), *m);
            }
        }
    }

    #[test]
    fn sl2_gf3_all_decompose_and_oracle_agrees() {
        let gf3 = Field::Prime(3);
        let gl = small_general_linear_group(gf3, 2).unwrap();
        assert_eq!(gl.len(), 48);
        // Brute-force image of the commutator map.
        let mut image: Vec<Matrix> = Vec::new();
        for x in &gl {
            for y in &gl {
                let c = commutator(x, y).unwrap();
                if !image.contains(&c) {
                    image.push(c);
                }
            }
        }
        let sl = special_linear_group(gf3, 2);
        assert_eq!(sl.len(), 24);
        assert_eq!(image.len(), 24);
        for m in &sl {
            let pair = commutator_decompose(m).unwrap();
            assert_eq!(commutator(&pair.x, &pair.y).unwrap(), *m);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = Matrix::from_ints(Q, &[&[2, 0], &[0, 1]]);
        assert!(matches!(
            commutator_decompose(&m),
            Err(Error::NotUnimodular(_))
        ));
        let f = Matrix::identity(Field::F64, 2);
        assert_eq!(
            commutator_decompose(&f),
            Err(Error::UnsupportedField(Field::F64))
        );
    }

    #[test]
    fn lu_round_trip() {
        let a = Matrix::from_ints(Q, &[&[2, 1, 0], &[4, 3, 1], &[0, 1, 5]]);
        let (l, u) = lu_no_pivot(&a).unwrap();
        assert_eq!(&l * &u, a);
        assert!(lu_no_pivot(&Matrix::from_ints(Q, &[&[0, 1], &[1, 0]])).is_none());
    }

    /// Unimodular integer matrix: a product of elementary row operations
    /// with multipliers in `-2..=2`.
    fn small_integer_special(k: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut m = Matrix::identity(Q, k);
        for _ in 0..3 * k {
            let (i, j) = (rng.gen_range(0..k), rng.gen_range(0..k));
            if i == j {
                continue;
            }
            let c = Q.from_int(rng.gen_range(-2..=2));
            for col in 0..k {
                let e = Q.add(m.get(i, col), &Q.mul(&c, m.get(j, col)));
                m.set(i, col, e);
            }
        }
        m
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
        for (field, k) in [(Field::Prime(2), 3), (Field::Prime(5), 3), (Q, 2), (Q, 4)] {
            for _ in 0..500 {
                let m = if field == Q {
                    small_integer_special(k, &mut rng)
                } else {
                    Matrix::random_special(field, k, &mut rng)
                };
                let pair = commutator_decompose(&m).unwrap();
                assert!(pair.x.is_invertible() && pair.y.is_invertible());
                assert_eq!(commutator(&pair.x, &pair.y).unwrap(), m, "{field}\n{m}");
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Matrix::random_special(Field::Prime(5), 3, &mut rng);
        assert_eq!(
            commutator_decompose(&m).unwrap(),
            commutator_decompose(&m).unwrap()
        );
    }
}
