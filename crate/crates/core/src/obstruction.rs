//! Certificates that a block-diagonal matrix is not a product of five
//! layers.
//!
//! Every check here is a necessary condition for five-layer
//! representability: `obstructed = true` proves non-membership, while
//! `obstructed = false` means only that this certificate does not apply.
//!
//! * trace: for `diag(M₁, M₄) ∈ [T_{m,n}]⁵` there must be invertible
//!   diagonal `D`, `D̃` with `m·1 + tr(M₄D̃) = n·1 + tr(M₁⁻¹D)`.
//! * spectra: for `diag(M₁, M₄) ∈ [BL ∪ BU]⁵` the matrices `I − M₁⁻¹` and
//!   `I − M₄` are `ZA` and `AZ` for some rectangular `A`, `Z`, so
//!   `tⁿ·χ(I − M₁⁻¹) = tᵐ·χ(I − M₄)`.
//! * rank one: with `n = 1` the trace argument degenerates to `I − D̂XD`
//!   having rank one, which the cyclic shift `X` never allows for `m > 2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{pick_gh, Elem, Field};
use crate::matkit::Matrix;

/// Finite-field enumeration budget (`q^{m+n}` resp. `q^{2m}`).
pub const ENUMERATION_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Trace,
    Spectra,
    RankOne,
    PermSweep,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    /// `Σ coefficients[k]·x_k = rhs` over invertible `x_k`: the first `n`
    /// coefficients are `diag(M₄)`, the rest `−diag(M₁⁻¹)`.
    Trace {
        coefficients: Vec<String>,
        rhs: String,
        method: TraceMethod,
        /// All values of the left side, when enumerated.
        reachable: Option<Vec<String>>,
        solvable: bool,
    },
    /// `tⁿ·χ(I − M₁⁻¹)` and `tᵐ·χ(I − M₄)` (highest degree first) and the
    /// same polynomials with all factors of `t` removed.
    Spectra {
        lhs: Vec<String>,
        rhs: Vec<String>,
        stripped_lhs: Vec<String>,
        stripped_rhs: Vec<String>,
    },
    RankOne {
        /// `X(1,1)`, `X(2,2)`, `X(2,1)`; all zero makes the leading 2x2
        /// minor of `I − D̂XD` equal to 1.
        pinned_entries: Vec<String>,
        leading_minor: String,
        /// Number of diagonal pairs `(D̂, D)` enumerated, if any.
        enumerated: Option<u64>,
        witness_det: String,
    },
    Sweep {
        bipartitions_checked: usize,
        /// Bipartitions (positions assigned to `M₁`) that were not obstructed.
        unobstructed: Vec<Vec<usize>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    Enumeration,
    LinearForm,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub mode: Mode,
    pub obstructed: bool,
    pub certificate: Certificate,
    pub bipartition: Option<Vec<usize>>,
}

fn fmt_all(field: Field, elems: &[Elem]) -> Vec<String> {
    elems.iter().map(|e| field.format_elem(e)).collect()
}

/// The cyclic shift `X(i, j) = 1` iff `j − i ≡ 1 (mod m)`, and the
/// companion-like `Y` with `Y(1,1) = δ(m·1 − n·1)`, `Y(n,1) = (−1)^{m+n}`
/// and ones on the superdiagonal (1-based indices).
pub fn build_blockdiag_witness(m: usize, n: usize, field: Field) -> Result<(Matrix, Matrix)> {
    field.require_exact()?;
    if m < 2 || n < 2 {
        return Err(Error::DimensionTooSmall(format!(
            "need m, n > 1, got ({m}, {n})"
        )));
    }
    let x = cyclic_shift(field, m);
    let mut y = Matrix::zeros(field, n, n);
    for i in 0..n - 1 {
        y.set(i, i + 1, field.one());
    }
    let same = field.from_int(m as i64) == field.from_int(n as i64);
    y.set(0, 0, if same { field.one() } else { field.zero() });
    y.set(
        n - 1,
        0,
        field.from_int(if (m + n).is_multiple_of(2) { 1 } else { -1 }),
    );
    let want = field.from_int(if (m + 1).is_multiple_of(2) { 1 } else { -1 });
    if *x.det()?.elem() != want || *y.det()?.elem() != want {
        return Err(Error::VerificationFailed(
            "witness determinants differ from (-1)^(m+1)".into(),
        ));
    }
    Ok((x, y))
}

fn cyclic_shift(field: Field, m: usize) -> Matrix {
    Matrix::from_fn(field, m, m, |i, j| {
        if (j + m - i) % m == 1 % m {
            field.one()
        } else {
            field.zero()
        }
    })
}

/// `diag(A, B)`.
pub fn block_diagonal(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let top = a.hstack(&Matrix::zeros(a.field(), a.rows(), b.cols()))?;
    let bottom = Matrix::zeros(a.field(), b.rows(), a.cols()).hstack(b)?;
    top.vstack(&bottom)
}

/// Exact set of values of `Σ c_k x_k` over invertible `x_k`, by folding one
/// variable at a time over all field elements.
fn reachable_sums(field: Field, coeffs: &[Elem]) -> Vec<Elem> {
    let units = field.units().expect("finite field");
    let mut reach = vec![field.zero()];
    for c in coeffs {
        let mut next: Vec<Elem> = Vec::new();
        for s in &reach {
            for u in &units {
                let v = field.add(s, &field.mul(c, u));
                if !next.contains(&v) {
                    next.push(v);
                }
            }
        }
        reach = next;
    }
    let order = field.elements().expect("finite field");
    order.into_iter().filter(|e| reach.contains(e)).collect()
}

/// Solvability of `Σ c_k x_k = r` with every `x_k ≠ 0`, by counting the
/// nonzero coefficients: none needs `r = 0`; one needs `r ≠ 0`; two or
/// more cover every value, except over GF(2) where all `x_k = 1` forces
/// `r = (count)·1`.
pub fn linear_form_solvable(field: Field, coeffs: &[Elem], rhs: &Elem) -> bool {
    let k = coeffs.iter().filter(|c| !field.is_zero(c)).count();
    match k {
        0 => field.is_zero(rhs),
        1 => !field.is_zero(rhs),
        _ if field.order() == Some(2) => *rhs == field.from_int(k as i64),
        _ => true,
    }
}

fn budget_allows(field: Field, exponent: usize) -> bool {
    field
        .order()
        .and_then(|q| q.checked_pow(exponent as u32))
        .is_some_and(|total| total <= ENUMERATION_BUDGET)
}

/// Decides whether invertible diagonal `D`, `D̃` can satisfy
/// `m·1 + tr(M₄D̃) = n·1 + tr(M₁⁻¹D)`.
pub fn trace_obstruction(m1: &Matrix, m4: &Matrix) -> Result<ObstructionReport> {
    let field = m1.field();
    field.require_exact()?;
    if m4.field() != field {
        return Err(Error::FieldMismatch(field, m4.field()));
    }
    let m1_inv = m1.inverse()?;
    if !m4.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let (m, n) = (m1.rows(), m4.rows());
    let mut coeffs = m4.diag();
    coeffs.extend(m1_inv.diag().iter().map(|e| field.neg(e)));
    let rhs = field.from_int(n as i64 - m as i64);

    let (method, reachable, solvable) = if field.order().is_some() && budget_allows(field, m + n) {
        let reach = reachable_sums(field, &coeffs);
        let ok = reach.contains(&rhs);
        (TraceMethod::Enumeration, Some(fmt_all(field, &reach)), ok)
    } else {
        (
            TraceMethod::LinearForm,
            None,
            linear_form_solvable(field, &coeffs, &rhs),
        )
    };
    Ok(ObstructionReport {
        mode: Mode::Trace,
        obstructed: !solvable,
        certificate: Certificate::Trace {
            coefficients: fmt_all(field, &coeffs),
            rhs: field.format_elem(&rhs),
            method,
            reachable,
            solvable,
        },
        bipartition: None,
    })
}

/// Strips every factor `t` from a polynomial given highest degree first.
fn strip_t(field: Field, poly: &[Elem]) -> Vec<Elem> {
    let keep = poly
        .iter()
        .rposition(|c| !field.is_zero(c))
        .map_or(0, |i| i + 1);
    poly[..keep].to_vec()
}

/// Compares `tⁿ·χ(I − M₁⁻¹)` with `tᵐ·χ(I − M₄)`.
pub fn spectra_obstruction(m1: &Matrix, m4: &Matrix) -> Result<ObstructionReport> {
    let field = m1.field();
    field.require_exact()?;
    if m4.field() != field {
        return Err(Error::FieldMismatch(field, m4.field()));
    }
    if !m4.is_square() {
        return Err(Error::DimensionMismatch("M4 must be square".into()));
    }
    let (m, n) = (m1.rows(), m4.rows());
    let left = &Matrix::identity(field, m) - &m1.inverse()?;
    let right = &Matrix::identity(field, n) - m4;
    let mut lhs = left.charpoly()?;
    lhs.extend(std::iter::repeat_n(field.zero(), n));
    let mut rhs = right.charpoly()?;
    rhs.extend(std::iter::repeat_n(field.zero(), m));
    let stripped_lhs = strip_t(field, &lhs);
    let stripped_rhs = strip_t(field, &rhs);
    Ok(ObstructionReport {
        mode: Mode::Spectra,
        obstructed: lhs != rhs,
        certificate: Certificate::Spectra {
            lhs: fmt_all(field, &lhs),
            rhs: fmt_all(field, &rhs),
            stripped_lhs: fmt_all(field, &stripped_lhs),
            stripped_rhs: fmt_all(field, &stripped_rhs),
        },
        bipartition: None,
    })
}

/// `diag(g, h, (gh)⁻¹, 1, …, 1)` of size `m + n` with `(g, h)` from
/// [`pick_gh`].
pub fn build_perm_witness(m: usize, n: usize, field: Field) -> Result<Matrix> {
    let (g, h) = pick_gh(field)?;
    perm_witness_from(g.elem(), h.elem(), m, n, field)
}

/// The same family for caller-chosen `g`, `h` (each `≠ 0, 1`, `gh ≠ 1`).
pub fn perm_witness_from(g: &Elem, h: &Elem, m: usize, n: usize, field: Field) -> Result<Matrix> {
    field.require_exact()?;
    if m + n <= 3 {
        return Err(Error::DimensionTooSmall(format!(
            "need m + n > 3, got {}",
            m + n
        )));
    }
    let gh = field.mul(g, h);
    let bad = |e: &Elem| field.is_zero(e) || field.is_one(e);
    if bad(g) || bad(h) || bad(&gh) {
        return Err(Error::InvalidLiteral {
            field,
            literal: format!("g = {}, h = {}", field.format_elem(g), field.format_elem(h)),
        });
    }
    let mut diag = vec![g.clone(), h.clone(), field.inv(&gh)?];
    diag.resize(m + n, field.one());
    let w = Matrix::diagonal(field, &diag);
    if !w.det()?.is_one() {
        return Err(Error::VerificationFailed(
            "witness determinant is not 1".into(),
        ));
    }
    Ok(w)
}

/// All `m`-subsets of `0..total`, lexicographic.
fn subsets(total: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, total: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..total {
            if total - i < m - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, total, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, total, m, &mut Vec::new(), &mut out);
    out
}

/// Runs [`spectra_obstruction`] on every bipartition of the diagonal into
/// `m` and `n` entries. Conjugating a diagonal matrix by a permutation
/// only reorders its diagonal, and the blocks themselves are diagonal, so
/// these cover every `P_π M P_{π⁻¹}`.
pub fn perm_sweep(d: &Matrix, m: usize, n: usize) -> Result<ObstructionReport> {
    let field = d.field();
    field.require_exact()?;
    if !d.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    if d.rows() != m + n {
        return Err(Error::DimensionMismatch(format!(
            "matrix has size {}, split is ({m}, {n})",
            d.rows()
        )));
    }
    let diag = d.diag();
    if diag.iter().any(|e| field.is_zero(e)) {
        return Err(Error::SingularMatrix);
    }
    let parts = subsets(m + n, m);
    let mut unobstructed = Vec::new();
    for part in &parts {
        let first: Vec<Elem> = part.iter().map(|&i| diag[i].clone()).collect();
        let rest: Vec<Elem> = (0..m + n)
            .filter(|i| !part.contains(i))
            .map(|i| diag[i].clone())
            .collect();
        let report = spectra_obstruction(
            &Matrix::diagonal(field, &first),
            &Matrix::diagonal(field, &rest),
        )?;
        if !report.obstructed {
            unobstructed.push(part.clone());
        }
    }
    Ok(ObstructionReport {
        mode: Mode::PermSweep,
        obstructed: unobstructed.is_empty(),
        bipartition: unobstructed.first().cloned(),
        certificate: Certificate::Sweep {
            bipartitions_checked: parts.len(),
            unobstructed,
        },
    })
}

/// The `n = 1` branch: no invertible diagonal `D̂`, `D` make `I − D̂XD`
/// rank one, for the `m x m` cyclic shift `X`, `m > 2`.
pub fn rank_one_case_check(m: usize, field: Field) -> Result<ObstructionReport> {
    field.require_exact()?;
    if m <= 2 {
        return Err(Error::DimensionTooSmall(format!("need m > 2, got {m}")));
    }
    let x = cyclic_shift(field, m);
    let pinned = [x.get(0, 0), x.get(1, 1), x.get(1, 0)];
    let entry_argument = pinned.iter().all(|e| field.is_zero(e));
    // With those entries zero, (I − D̂XD) restricted to rows/cols {1, 2}
    // is [[1, *], [0, 1]] whatever the diagonals are.
    let minor = field.one();

    let mut enumerated = None;
    let mut enumeration_ok = true;
    if field.order().is_some() && budget_allows(field, 2 * m) {
        let units = field.units().expect("finite");
        let total = (units.len() as u64).pow(2 * m as u32);
        let id = Matrix::identity(field, m);
        for code in 0..total {
            let mut c = code;
            let mut pick = || {
                let u = units[(c % units.len() as u64) as usize].clone();
                c /= units.len() as u64;
                u
            };
            let dh: Vec<Elem> = (0..m).map(|_| pick()).collect();
            let d: Vec<Elem> = (0..m).map(|_| pick()).collect();
            let prod = &(&Matrix::diagonal(field, &dh) * &x) * &Matrix::diagonal(field, &d);
            if (&id - &prod).rank() <= 1 {
                enumeration_ok = false;
                break;
            }
        }
        enumerated = Some(total);
    }

    let sign = field.from_int(if (m + 1).is_multiple_of(2) { 1 } else { -1 });
    let witness = block_diagonal(&x.inverse()?, &Matrix::diagonal(field, &[sign]))?;
    let witness_det = witness.det()?;
    if !witness_det.is_one() {
        return Err(Error::VerificationFailed(
            "rank-one witness determinant is not 1".into(),
        ));
    }
    Ok(ObstructionReport {
        mode: Mode::RankOne,
        obstructed: entry_argument && enumeration_ok,
        certificate: Certificate::RankOne {
            pinned_entries: pinned.iter().map(|e| field.format_elem(e)).collect(),
            leading_minor: field.format_elem(&minor),
            enumerated,
            witness_det: witness_det.to_string(),
        },
        bipartition: None,
    })
}

/// `diag(X⁻¹, (−1)^{m+1})`, the `(m, 1)` witness.
pub fn rank_one_witness(m: usize, field: Field) -> Result<Matrix> {
    if m <= 2 {
        return Err(Error::DimensionTooSmall(format!("need m > 2, got {m}")));
    }
    let sign = field.from_int(if (m + 1).is_multiple_of(2) { 1 } else { -1 });
    block_diagonal(
        &cyclic_shift(field, m).inverse()?,
        &Matrix::diagonal(field, &[sign]),
    )
}
