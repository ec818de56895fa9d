//! Block unitriangular factorizations.
//!
//! Layers are stated relative to an `(m, n)` block split:
//! `Lower(A) = [I 0; A I]`, `Upper(A) = [I A; 0 I]`,
//! `UpperDiag(D, A) = [diag(D) A; 0 I]`. A [`Factorization`] lists its
//! layers leftmost first, so it evaluates to `F₁ F₂ ⋯ F_k`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::commutator::{self, commutator_decompose};
use crate::error::{Error, Result};
use crate::fields::{Elem, Field};
use crate::matkit::{BlockView, Matrix};
use crate::sl4gf2;

#[derive(Clone, Debug, PartialEq)]
pub enum BlockLayer {
    /// `[I 0; A I]`, `A` is `n x m`.
    Lower(Matrix),
    /// `[I A; 0 I]`, `A` is `m x n`.
    Upper(Matrix),
    /// `[diag(d) A; 0 I]`, `A` is `m x n`, every `d` nonzero.
    UpperDiag { d: Vec<Elem>, a: Matrix },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Lower,
    Upper,
    UpperDiag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorizationKind {
    /// `L U L U L U`, all unitriangular.
    Sl6,
    /// `L U L U L UpperDiag`.
    Gl6,
    /// `L U L U L`.
    Lulul5,
}

impl FactorizationKind {
    pub fn pattern(self) -> &'static [LayerKind] {
        use LayerKind::*;
        match self {
            FactorizationKind::Sl6 => &[Lower, Upper, Lower, Upper, Lower, Upper],
            FactorizationKind::Gl6 => &[Lower, Upper, Lower, Upper, Lower, UpperDiag],
            FactorizationKind::Lulul5 => &[Lower, Upper, Lower, Upper, Lower],
        }
    }
}

impl BlockLayer {
    pub fn kind(&self) -> LayerKind {
        match self {
            BlockLayer::Lower(_) => LayerKind::Lower,
            BlockLayer::Upper(_) => LayerKind::Upper,
            BlockLayer::UpperDiag { .. } => LayerKind::UpperDiag,
        }
    }

    pub fn block(&self) -> &Matrix {
        match self {
            BlockLayer::Lower(a) | BlockLayer::Upper(a) | BlockLayer::UpperDiag { a, .. } => a,
        }
    }

    fn check(&self, m: usize, n: usize, field: Field) -> Result<()> {
        let a = self.block();
        let want = match self {
            BlockLayer::Lower(_) => (n, m),
            _ => (m, n),
        };
        if a.field() != field {
            return Err(Error::FieldMismatch(a.field(), field));
        }
        if (a.rows(), a.cols()) != want {
            return Err(Error::DimensionMismatch(format!(
                "layer block is {}x{}, expected {}x{}",
                a.rows(),
                a.cols(),
                want.0,
                want.1
            )));
        }
        if let BlockLayer::UpperDiag { d, .. } = self {
            if d.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "diagonal has {} entries, expected {m}",
                    d.len()
                )));
            }
            if d.iter().any(|e| !field.contains(e) || field.is_zero(e)) {
                return Err(Error::SingularMatrix);
            }
        }
        Ok(())
    }

    /// The full `(m + n) x (m + n)` matrix of this layer.
    pub fn to_matrix(&self, m: usize, n: usize, field: Field) -> Result<Matrix> {
        self.check(m, n, field)?;
        let mut out = Matrix::identity(field, m + n);
        match self {
            BlockLayer::Lower(a) => place(&mut out, a, m, 0),
            BlockLayer::Upper(a) => place(&mut out, a, 0, m),
            BlockLayer::UpperDiag { d, a } => {
                place(&mut out, a, 0, m);
                for (i, e) in d.iter().enumerate() {
                    out.set(i, i, e.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn det(&self, field: Field) -> Elem {
        match self {
            BlockLayer::UpperDiag { d, .. } => {
                d.iter().fold(field.one(), |acc, e| field.mul(&acc, e))
            }
            _ => field.one(),
        }
    }
}

fn place(out: &mut Matrix, block: &Matrix, r0: usize, c0: usize) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            out.set(r0 + i, c0 + j, block.get(i, j).clone());
        }
    }
}

/// An ordered list of block layers over one split and field.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub kind: FactorizationKind,
    pub m: usize,
    pub n: usize,
    pub field: Field,
    pub layers: Vec<BlockLayer>,
}

impl Factorization {
    /// Checks block shapes and the layer pattern required by `kind`.
    pub fn validate(&self) -> Result<()> {
        let pattern = self.kind.pattern();
        if self.layers.len() != pattern.len() {
            return Err(Error::MalformedFactorization(format!(
                "{:?} needs {} layers, found {}",
                self.kind,
                pattern.len(),
                self.layers.len()
            )));
        }
        for (i, (layer, want)) in self.layers.iter().zip(pattern).enumerate() {
            if layer.kind() != *want {
                return Err(Error::MalformedFactorization(format!(
                    "layer {i} is {:?}, expected {want:?}",
                    layer.kind()
                )));
            }
            layer.check(self.m, self.n, self.field)?;
        }
        Ok(())
    }

    /// Left-to-right product of the layers.
    pub fn evaluate(&self) -> Result<Matrix> {
        self.validate()?;
        evaluate_layers(&self.layers, self.m, self.n, self.field)
    }

    /// Exact check that the product of the layers is `target`.
    pub fn reproduces(&self, target: &Matrix) -> Result<bool> {
        self.validate()?;
        layers_reproduce(&self.layers, self.m, self.n, self.field, target)
    }

    /// Product of all layer determinants.
    pub fn det(&self) -> Elem {
        self.layers.iter().fold(self.field.one(), |acc, l| {
            self.field.mul(&acc, &l.det(self.field))
        })
    }
}

/// Product of an arbitrary layer list; the empty list gives the identity.
pub fn evaluate_layers(layers: &[BlockLayer], m: usize, n: usize, field: Field) -> Result<Matrix> {
    layers
        .iter()
        .try_fold(Matrix::identity(field, m + n), |acc, layer| {
            acc.checked_mul(&layer.to_matrix(m, n, field)?)
        })
}

pub fn evaluate_factorization(f: &Factorization) -> Result<Matrix> {
    f.evaluate()
}

/// `F₁ ⋯ F_k == target`. Over ℚ the product is accumulated as an integer
/// matrix over one common denominator, skipping the gcd that every
/// rational operation would otherwise pay.
pub fn layers_reproduce(
    layers: &[BlockLayer],
    m: usize,
    n: usize,
    field: Field,
    target: &Matrix,
) -> Result<bool> {
    if target.field() != field {
        return Err(Error::FieldMismatch(field, target.field()));
    }
    if (target.rows(), target.cols()) != (m + n, m + n) {
        return Ok(false);
    }
    if field != Field::Rational {
        return Ok(evaluate_layers(layers, m, n, field)? == *target);
    }
    for layer in layers {
        layer.check(m, n, field)?;
    }
    Ok(rational_product_matches(layers, m, n, target))
}

fn as_rational(e: &Elem) -> &BigRational {
    match e {
        Elem::Rational(q) => q,
        other => panic!("expected a rational entry, got {other:?}"),
    }
}

/// Common denominator `s` and the integers `s·q` for each `q`.
fn common_denominator<'a>(
    values: impl Iterator<Item = &'a BigRational> + Clone,
) -> (BigInt, Vec<BigInt>) {
    let scale = values
        .clone()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints = values.map(|q| q.numer() * (&scale / q.denom())).collect();
    (scale, ints)
}

fn rational_product_matches(layers: &[BlockLayer], m: usize, n: usize, target: &Matrix) -> bool {
    let size = m + n;
    let mut acc: Vec<BigInt> = (0..size * size)
        .map(|k| {
            if k / size == k % size {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
        .collect();
    let mut den = BigInt::one();
    for layer in layers {
        let block = layer.block();
        let diag: &[Elem] = match layer {
            BlockLayer::UpperDiag { d, .. } => d,
            _ => &[],
        };
        let values = block.entries().iter().chain(diag).map(as_rational);
        let (s, ints) = common_denominator(values);
        let (a_hat, d_hat) = ints.split_at(block.entries().len());
        let unit = s.is_one();
        let scaled = |x: &BigInt| if unit { x.clone() } else { x * &s };
        for i in 0..size {
            let row = &acc[i * size..(i + 1) * size];
            let mut next: Vec<BigInt> = Vec::with_capacity(size);
            match layer {
                // Left columns gain the right columns times A.
                BlockLayer::Lower(_) => {
                    for j in 0..m {
                        let mut v = scaled(&row[j]);
                        for k in 0..n {
                            v += &row[m + k] * &a_hat[k * m + j];
                        }
                        next.push(v);
                    }
                    next.extend(row[m..].iter().map(scaled));
                }
                BlockLayer::Upper(_) | BlockLayer::UpperDiag { .. } => {
                    match layer {
                        BlockLayer::UpperDiag { .. } => {
                            next.extend(row[..m].iter().zip(d_hat).map(|(x, d)| x * d))
                        }
                        _ => next.extend(row[..m].iter().map(scaled)),
                    }
                    for j in 0..n {
                        let mut v = scaled(&row[m + j]);
                        for k in 0..m {
                            v += &row[k] * &a_hat[k * n + j];
                        }
                        next.push(v);
                    }
                }
            }
            acc.splice(i * size..(i + 1) * size, next);
        }
        if !unit {
            den *= &s;
        }
    }
    acc.iter().zip(target.entries()).all(|(x, t)| {
        let t = as_rational(t);
        x * t.denom() == &den * t.numer()
    })
}

fn half_size(m: &Matrix) -> Result<usize> {
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

fn require_unimodular(m: &Matrix) -> Result<()> {
    let det = m.det()?;
    if det.is_one() {
        Ok(())
    } else {
        Err(Error::NotUnimodular(det.to_string()))
    }
}

/// `M = L(A₁) U(A₂) L(A₃) U(A₄) L(A₅)` for `M ∈ SL_{2n}` with invertible
/// upper-right block, by the closed-form construction from a commutator
/// `[X, Y] = M₂(M₄M₂⁻¹M₁ − M₃)`. Over GF(2) with `n = 2` (where that
/// commutator may not exist) the exhaustive lookup table is used instead.
pub fn five_layer_factor(m: &Matrix) -> Result<Factorization> {
    five_layer_factor_tuned(m, 0)
}

/// [`five_layer_factor`] that, over ℚ, first tries `candidates`
/// conjugators for the commutator in floating point and keeps the one
/// giving the smallest layer norms. The result is still exact; only the
/// choice among valid factorizations changes.
pub fn five_layer_factor_tuned(m: &Matrix, candidates: usize) -> Result<Factorization> {
    let field = m.field();
    field.require_exact()?;
    let n = half_size(m)?;
    require_unimodular(m)?;
    let blocks = m.block_split(n, n)?;
    if !blocks.m2.is_invertible() {
        return Err(Error::SingularUpperRight);
    }
    if n == 2 && field == Field::Prime(2) {
        return sl4gf2::five_layer_lookup_matrix(m);
    }
    let m2i = blocks.m2.inverse()?;
    let k = commutator_target(&blocks, &m2i);
    if k.det()? != m.det()? {
        return Err(Error::VerificationFailed(
            "det(K) differs from det(M)".into(),
        ));
    }
    let mut pair = None;
    if field == Field::Rational && candidates > 0 {
        for (_, p) in ranked_conjugators(&blocks, &k, candidates)? {
            if let Some(found) = commutator::conjugated_pair(&k, &p)? {
                pair = Some(found);
                break;
            }
        }
    }
    let pair = match pair {
        Some(p) => p,
        None => commutator_decompose(&k)?,
    };
    let [a1, a2, a3, a4, a5] = lulul_blocks(&blocks, &m2i, &pair.x, &pair.y)?;
    let f = Factorization {
        kind: FactorizationKind::Lulul5,
        m: n,
        n,
        field,
        layers: vec![
            BlockLayer::Lower(a1),
            BlockLayer::Upper(a2),
            BlockLayer::Lower(a3),
            BlockLayer::Upper(a4),
            BlockLayer::Lower(a5),
        ],
    };
    if !f.reproduces(m)? {
        return Err(Error::VerificationFailed(
            "five-layer product differs from M".into(),
        ));
    }
    Ok(f)
}

/// `K = M₂(M₄M₂⁻¹M₁ − M₃)`.
fn commutator_target(b: &BlockView, m2i: &Matrix) -> Matrix {
    &b.m2 * &(&(&(&b.m4 * m2i) * &b.m1) - &b.m3)
}

/// `A₁ … A₅` from `[X, Y] = K`.
fn lulul_blocks(b: &BlockView, m2i: &Matrix, x: &Matrix, y: &Matrix) -> Result<[Matrix; 5]> {
    let (m1, m2, m4) = (&b.m1, &b.m2, &b.m4);
    let xi = x.inverse()?;
    let yi = y.inverse()?;
    let id = Matrix::identity(x.field(), x.rows());
    let i_minus_x = &id - x;
    let m2i_xi = m2i * &xi;
    Ok([
        &(&(m4 * m2i) + &(&(&m2i_xi * &yi) * &i_minus_x)) - &m2i_xi,
        x * m2,
        &m2i_xi * &(y - &id),
        &(&yi * &i_minus_x) * m2,
        m2i * &(m1 - y),
    ])
}

fn to_float(m: &Matrix) -> Result<Matrix> {
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

/// Float cost of the five-layer plan [`five_layer_factor_tuned`] would
/// choose, or `None` when it does not apply.
fn plan_cost(m: &Matrix, n: usize, candidates: usize) -> Result<Option<f64>> {
    let blocks = m.block_split(n, n)?;
    let Ok(m2i) = blocks.m2.inverse() else {
        return Ok(None);
    };
    let k = commutator_target(&blocks, &m2i);
    Ok(ranked_conjugators(&blocks, &k, candidates)?
        .first()
        .map(|(c, _)| *c))
}

/// Shifts `A = M₁⁻¹(±I − M₂)`, computed in floats and lifted exactly.
fn conditioning_shifts(blocks: &BlockView) -> Result<Vec<Matrix>> {
    let m1 = to_float(&blocks.m1)?;
    let m2 = to_float(&blocks.m2)?;
    let Ok(m1i) = m1.inverse() else {
        return Ok(Vec::new());
    };
    let id = Matrix::identity(Field::F64, m2.rows());
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let target = &id.scale(&Elem::Float(sign)) - &m2;
        let a = &m1i * &target;
        let lifted: Option<Vec<Elem>> = a
            .entries()
            .iter()
            .map(|e| match e {
                Elem::Float(x) => BigRational::from_float(*x).map(Elem::Rational),
                _ => None,
            })
            .collect();
        if let Some(entries) = lifted {
            out.push(Matrix::from_fn(
                Field::Rational,
                a.rows(),
                a.cols(),
                |i, j| entries[i * a.cols() + j].clone(),
            ));
        }
    }
    Ok(out)
}

const ACCEPTABLE_COST: f64 = 22.0;
const MIN_GAIN: f64 = 1.5;

/// Conjugators with the float cost `Σ ln(1 + ‖Aᵢ‖∞)` of the layers they
/// would produce, best first; ones that fail in floating point are dropped.
fn ranked_conjugators(blocks: &BlockView, k: &Matrix, count: usize) -> Result<Vec<(f64, Matrix)>> {
    let fb = BlockView {
        m1: to_float(&blocks.m1)?,
        m2: to_float(&blocks.m2)?,
        m3: to_float(&blocks.m3)?,
        m4: to_float(&blocks.m4)?,
    };
    let Ok(m2i) = fb.m2.inverse() else {
        return Ok(Vec::new());
    };
    let kf = to_float(k)?;
    let mut scored = Vec::new();
    for p in commutator::small_conjugators(k, count) {
        let Ok(Some(pair)) = commutator::conjugated_pair(&kf, &to_float(&p)?) else {
            continue;
        };
        let Ok(layers) = lulul_blocks(&fb, &m2i, &pair.x, &pair.y) else {
            continue;
        };
        let cost: f64 = layers
            .iter()
            .map(|a| a.norm_inf().map_or(f64::INFINITY, f64::ln_1p))
            .sum();
        if cost.is_finite() {
            scored.push((cost, p));
        }
    }
    // The identity keeps entries about half the size of any other choice,
    // so it stays first unless it is clearly worse. Both constants were
    // fitted on random well-conditioned 8x8 float matrices, where an
    // identity cost above 22 goes with errors beyond 1e-10.
    let identity_cost = scored
        .first()
        .filter(|(_, p)| p.is_identity())
        .map(|(c, _)| *c);
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(c) = identity_cost {
        let best = scored[0].0;
        if c <= ACCEPTABLE_COST || best > c - MIN_GAIN {
            let i = scored
                .iter()
                .position(|(_, p)| p.is_identity())
                .expect("identity present");
            let id = scored.remove(i);
            scored.insert(0, id);
        }
    }
    Ok(scored)
}

fn require_same_square(a: &Matrix, b: &Matrix) -> Result<()> {
    a.field().require_exact()?;
    if a.field() != b.field() {
        return Err(Error::FieldMismatch(a.field(), b.field()));
    }
    if !a.is_square() || (a.rows(), a.cols()) != (b.rows(), b.cols()) {
        return Err(Error::DimensionMismatch(
            "expected two square matrices of one size".into(),
        ));
    }
    Ok(())
}

/// Greedily extends `vectors` (assumed independent) with standard basis
/// vectors, scanned in index order, to a basis of `F^size`. Returns only
/// the added vectors.
fn complete_with_standard(field: Field, size: usize, vectors: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let mut current: Vec<Vec<Elem>> = vectors.to_vec();
    let mut added = Vec::new();
    for i in 0..size {
        if current.len() == size {
            break;
        }
        let e: Vec<Elem> = (0..size)
            .map(|j| if i == j { field.one() } else { field.zero() })
            .collect();
        current.push(e.clone());
        if Matrix::from_columns(field, size, &current).rank() == current.len() {
            added.push(e);
        } else {
            current.pop();
        }
    }
    added
}

/// `C` with `CA + B` invertible; exists iff `ker A ∩ ker B = 0`.
///
/// `C` maps `A(ker B)` isomorphically onto a complement of `im B` (both
/// completed greedily from standard basis vectors) and kills a complement
/// of `A(ker B)`.
pub fn completion_left(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    require_same_square(a, b)?;
    let field = a.field();
    let size = a.rows();
    if a.vstack(b)?.rank() < size {
        return Err(Error::KernelOverlap);
    }
    let w: Vec<Vec<Elem>> = b.kernel_basis()?.iter().map(|v| a.mul_vec(v)).collect();
    let (_, pivots) = b.rref();
    let image_b: Vec<Vec<Elem>> = pivots.iter().map(|&j| b.column(j)).collect();
    let complement = complete_with_standard(field, size, &image_b);
    debug_assert_eq!(complement.len(), w.len());

    let mut domain = w.clone();
    domain.extend(complete_with_standard(field, size, &w));
    let mut targets = complement;
    targets.resize(size, vec![field.zero(); size]);
    let c = &Matrix::from_columns(field, size, &targets)
        * &Matrix::from_columns(field, size, &domain).inverse()?;
    if !(&(&c * a) + b).is_invertible() {
        return Err(Error::VerificationFailed("CA + B is singular".into()));
    }
    Ok(c)
}

/// `C` with `AC + B` invertible; exists iff `coker A ∩ coker B = 0`.
pub fn completion_right(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    match completion_left(&a.transpose(), &b.transpose()) {
        Ok(c) => Ok(c.transpose()),
        Err(Error::KernelOverlap) => Err(Error::CokernelOverlap),
        Err(e) => Err(e),
    }
}

/// Shift `A` making the upper-right block of `M·[B A; 0 I]` invertible:
/// zero when `M₂` already is, otherwise a completion of `M₁A + M₂`.
fn upper_right_shift(m1: &Matrix, m2: &Matrix) -> Result<Matrix> {
    if m2.is_invertible() {
        Ok(Matrix::zeros(m2.field(), m2.rows(), m2.cols()))
    } else {
        completion_right(m1, m2)
    }
}

/// Six alternating unitriangular layers `L U L U L U` for any
/// `M ∈ SL_{2n}`.
pub fn six_layer_factor_sl(m: &Matrix) -> Result<Factorization> {
    six_layer_factor_sl_tuned(m, 0)
}

/// [`six_layer_factor_sl`] with the conjugator search of
/// [`five_layer_factor_tuned`].
pub fn six_layer_factor_sl_tuned(m: &Matrix, candidates: usize) -> Result<Factorization> {
    let field = m.field();
    field.require_exact()?;
    let n = half_size(m)?;
    require_unimodular(m)?;
    if m.is_identity() {
        let zero = Matrix::zeros(field, n, n);
        let layers = (0..6)
            .map(|i| {
                if i % 2 == 0 {
                    BlockLayer::Lower(zero.clone())
                } else {
                    BlockLayer::Upper(zero.clone())
                }
            })
            .collect();
        return Ok(Factorization {
            kind: FactorizationKind::Sl6,
            m: n,
            n,
            field,
            layers,
        });
    }
    let blocks = m.block_split(n, n)?;
    let shift = upper_right_shift(&blocks.m1, &blocks.m2)?;
    let shifted = m * &BlockLayer::Upper(shift.clone()).to_matrix(n, n, field)?;
    let mut layers = five_layer_factor_tuned(&shifted, candidates)?.layers;
    layers.push(BlockLayer::Upper(-&shift));
    let f = Factorization {
        kind: FactorizationKind::Sl6,
        m: n,
        n,
        field,
        layers,
    };
    if !f.reproduces(m)? {
        return Err(Error::VerificationFailed(
            "six-layer product differs from M".into(),
        ));
    }
    Ok(f)
}

/// `L U L U L [D A₆; 0 I]` for invertible `M` and diagonal `D` with
/// `det D = det M`.
pub fn six_layer_factor_gl(m: &Matrix, d: &[Elem]) -> Result<Factorization> {
    six_layer_factor_gl_tuned(m, d, 0)
}

/// [`six_layer_factor_gl`] with the conjugator search of
/// [`five_layer_factor_tuned`].
pub fn six_layer_factor_gl_tuned(
    m: &Matrix,
    d: &[Elem],
    candidates: usize,
) -> Result<Factorization> {
    let field = m.field();
    field.require_exact()?;
    let n = half_size(m)?;
    if d.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "diagonal has {} entries, expected {n}",
            d.len()
        )));
    }
    if let Some(e) = d.iter().find(|e| !field.contains(e)) {
        return Err(Error::InvalidLiteral {
            field,
            literal: format!("{e:?}"),
        });
    }
    if d.iter().any(|e| field.is_zero(e)) {
        return Err(Error::SingularMatrix);
    }
    let det_m = m.det()?;
    if det_m.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let det_d = d.iter().fold(field.one(), |acc, e| field.mul(&acc, e));
    if det_d != *det_m.elem() {
        return Err(Error::DeterminantMismatch {
            d: field.format_elem(&det_d),
            m: det_m.to_string(),
        });
    }
    let zero = Matrix::zeros(field, n, n);
    let scale_only = BlockLayer::UpperDiag {
        d: d.to_vec(),
        a: zero.clone(),
    };
    if scale_only.to_matrix(n, n, field)? == *m {
        let mut layers: Vec<BlockLayer> = (0..5)
            .map(|i| {
                if i % 2 == 0 {
                    BlockLayer::Lower(zero.clone())
                } else {
                    BlockLayer::Upper(zero.clone())
                }
            })
            .collect();
        layers.push(scale_only);
        return Ok(Factorization {
            kind: FactorizationKind::Gl6,
            m: n,
            n,
            field,
            layers,
        });
    }
    let blocks = m.block_split(n, n)?;
    let d_inv: Vec<Elem> = d.iter().map(|e| field.inv(e)).collect::<Result<_>>()?;
    let dmat = Matrix::diagonal(field, d);
    let base = upper_right_shift(&blocks.m1, &blocks.m2)?;
    let shifted_by = |a: &Matrix| -> Result<Matrix> {
        Ok(m * &BlockLayer::UpperDiag {
            d: d_inv.clone(),
            a: a.clone(),
        }
        .to_matrix(n, n, field)?)
    };
    let mut shift = base.clone();
    if field == Field::Rational && candidates > 0 {
        // Any A with M₁A + M₂ invertible works; A ≈ M₁⁻¹(±I − M₂) makes
        // that block close to ±I. Keep whichever plan is cheapest in floats.
        let mut best: Option<(f64, Matrix)> = None;
        let mut options = vec![base];
        options.extend(conditioning_shifts(&blocks)?);
        for a in options {
            let candidate = shifted_by(&a)?;
            let Some(cost) = plan_cost(&candidate, n, candidates)? else {
                continue;
            };
            let cost = cost + (&dmat * &a).norm_inf()?.ln_1p();
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, a));
            }
        }
        if let Some((_, a)) = best {
            shift = a;
        }
    }
    let mut layers = five_layer_factor_tuned(&shifted_by(&shift)?, candidates)?.layers;
    // [D⁻¹ A; 0 I]⁻¹ = [D −DA; 0 I]
    let last = -&(&dmat * &shift);
    layers.push(BlockLayer::UpperDiag {
        d: d.to_vec(),
        a: last,
    });
    let f = Factorization {
        kind: FactorizationKind::Gl6,
        m: n,
        n,
        field,
        layers,
    };
    if !f.reproduces(m)? {
        return Err(Error::VerificationFailed(
            "six-layer product differs from M".into(),
        ));
    }
    Ok(f)
}
