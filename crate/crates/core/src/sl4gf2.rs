//! Exhaustive search over SL₄(GF(2)) with the 2 + 2 block split.
//!
//! Elements are packed into 16 bits: entry `(r, c)` is bit `4r + c`, so
//! row `r` is the nibble `(bits >> 4r) & 0xf`. A 2x2 block `A` is packed
//! into 4 bits the same way (entry `(r, c)` is bit `2r + c`); generator
//! order is `Lower(0..16)` then `Upper(1..16)`.

use std::ops::Mul;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::factor::{BlockLayer, Factorization, FactorizationKind};
use crate::fields::{Elem, Field};
use crate::matkit::Matrix;

const GF2: Field = Field::Prime(2);

/// |GL₄(GF(2))| = (16 − 1)(16 − 2)(16 − 4)(16 − 8).
pub const GROUP_ORDER: usize = 20160;

/// Deepest level tracked by [`ReachSet`].
pub const MAX_DEPTH: u8 = 6;

const UNREACHED: u8 = u8::MAX;

/// A 4x4 matrix over GF(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PackedMat4(pub u16);

impl PackedMat4 {
    pub const IDENTITY: PackedMat4 = PackedMat4(0x8421);

    pub fn row(self, r: usize) -> u16 {
        (self.0 >> (4 * r)) & 0xf
    }

    pub fn get(self, r: usize, c: usize) -> bool {
        self.0 >> (4 * r + c) & 1 == 1
    }

    pub fn from_rows(rows: [u16; 4]) -> PackedMat4 {
        PackedMat4(
            rows.iter()
                .enumerate()
                .fold(0, |acc, (r, &row)| acc | (row & 0xf) << (4 * r)),
        )
    }

    /// Gauss-Jordan on nibbles; `None` when singular.
    pub fn inverse(self) -> Option<PackedMat4> {
        let mut a = [self.row(0), self.row(1), self.row(2), self.row(3)];
        let mut inv = [1u16, 2, 4, 8];
        for c in 0..4 {
            let p = (c..4).find(|&r| a[r] >> c & 1 == 1)?;
            a.swap(c, p);
            inv.swap(c, p);
            for r in 0..4 {
                if r != c && a[r] >> c & 1 == 1 {
                    a[r] ^= a[c];
                    inv[r] ^= inv[c];
                }
            }
        }
        Some(PackedMat4::from_rows(inv))
    }

    pub fn is_invertible(self) -> bool {
        self.inverse().is_some()
    }

    /// Upper-right 2x2 block, packed into 4 bits.
    pub fn upper_right(self) -> u8 {
        let r0 = (self.row(0) >> 2) & 3;
        let r1 = (self.row(1) >> 2) & 3;
        (r0 | r1 << 2) as u8
    }

    pub fn has_invertible_upper_right(self) -> bool {
        let a = self.upper_right();
        let (a00, a01, a10, a11) = (a & 1, a >> 1 & 1, a >> 2 & 1, a >> 3 & 1);
        (a00 & a11) ^ (a01 & a10) == 1
    }

    pub fn is_block_diagonal(self) -> bool {
        self.upper_right() == 0 && {
            let r2 = self.row(2) & 3;
            let r3 = self.row(3) & 3;
            r2 == 0 && r3 == 0
        }
    }

    /// `[I 0; A I]`.
    pub fn lower(a: u8) -> PackedMat4 {
        let a = a as u16;
        PackedMat4::from_rows([1, 2, 4 | (a & 3), 8 | (a >> 2 & 3)])
    }

    /// `[I A; 0 I]`.
    pub fn upper(a: u8) -> PackedMat4 {
        let a = a as u16;
        PackedMat4::from_rows([1 | (a & 3) << 2, 2 | (a >> 2 & 3) << 2, 4, 8])
    }

    pub fn to_matrix(self) -> Matrix {
        Matrix::from_fn(GF2, 4, 4, |r, c| Elem::Residue(self.get(r, c) as u64))
    }

    pub fn from_matrix(m: &Matrix) -> Result<PackedMat4> {
        if m.field() != GF2 || m.rows() != 4 || m.cols() != 4 {
            return Err(Error::DimensionMismatch(
                "expected a 4x4 matrix over gf:2".into(),
            ));
        }
        let mut bits = 0u16;
        for r in 0..4 {
            for c in 0..4 {
                if !GF2.is_zero(m.get(r, c)) {
                    bits |= 1 << (4 * r + c);
                }
            }
        }
        Ok(PackedMat4(bits))
    }
}

impl Mul for PackedMat4 {
    type Output = PackedMat4;

    fn mul(self, other: PackedMat4) -> PackedMat4 {
        let mut rows = [0u16; 4];
        for (r, out) in rows.iter_mut().enumerate() {
            let sel = self.row(r);
            for c in 0..4 {
                if sel >> c & 1 == 1 {
                    *out ^= other.row(c);
                }
            }
        }
        PackedMat4::from_rows(rows)
    }
}

/// Packed 2x2 block as a GF(2) matrix.
fn block_matrix(a: u8) -> Matrix {
    Matrix::from_fn(GF2, 2, 2, |r, c| {
        Elem::Residue((a >> (2 * r + c) & 1) as u64)
    })
}

/// Every element of SL₄(GF(2)) in increasing packed order.
pub fn group_elements() -> Vec<PackedMat4> {
    (0..=u16::MAX)
        .map(PackedMat4)
        .filter(|m| m.is_invertible())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Lower(u8),
    Upper(u8),
}

impl Generator {
    pub fn matrix(self) -> PackedMat4 {
        match self {
            Generator::Lower(a) => PackedMat4::lower(a),
            Generator::Upper(a) => PackedMat4::upper(a),
        }
    }
}

/// `BL ∪ BU`: 31 distinct matrices, the identity listed once as `Lower(0)`.
pub fn generators() -> Vec<Generator> {
    (0..16)
        .map(Generator::Lower)
        .chain((1..16).map(Generator::Upper))
        .collect()
}

/// Digest of the generator list, used to key cache files.
pub fn generator_hash() -> [u8; 32] {
    let mut h = Sha256::new();
    for g in generators() {
        h.update(g.matrix().0.to_le_bytes());
    }
    h.finalize().into()
}

/// Word length of every group element over `BL ∪ BU`, up to
/// [`MAX_DEPTH`], with one parent pointer per reached element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachSet {
    depth: Vec<u8>,
    /// `(predecessor, generator index)`; meaningless for unreached entries.
    parent: Vec<(u16, u8)>,
}

impl ReachSet {
    /// Breadth-first closure from the identity: `set(d + 1) = set(d)·G`.
    pub fn build() -> ReachSet {
        let gens: Vec<PackedMat4> = generators().iter().map(|g| g.matrix()).collect();
        let mut depth = vec![UNREACHED; 1 << 16];
        let mut parent = vec![(0u16, 0u8); 1 << 16];
        depth[PackedMat4::IDENTITY.0 as usize] = 0;
        let mut frontier = vec![PackedMat4::IDENTITY];
        for d in 1..=MAX_DEPTH {
            let mut next = Vec::new();
            for &x in &frontier {
                for (gi, &g) in gens.iter().enumerate() {
                    let y = x.mul(g);
                    if depth[y.0 as usize] == UNREACHED {
                        depth[y.0 as usize] = d;
                        parent[y.0 as usize] = (x.0, gi as u8);
                        next.push(y);
                    }
                }
            }
            next.sort_unstable();
            frontier = next;
        }
        ReachSet { depth, parent }
    }

    /// Word length, `None` when above [`MAX_DEPTH`].
    pub fn depth(&self, m: PackedMat4) -> Option<u8> {
        let d = self.depth[m.0 as usize];
        (d != UNREACHED).then_some(d)
    }

    /// Membership in `[BL ∪ BU]^d`.
    pub fn contains(&self, m: PackedMat4, d: u8) -> bool {
        self.depth(m).is_some_and(|x| x <= d)
    }

    /// Elements of `[BL ∪ BU]^d`, increasing.
    pub fn set(&self, d: u8) -> Vec<PackedMat4> {
        (0..=u16::MAX)
            .map(PackedMat4)
            .filter(|&m| self.contains(m, d))
            .collect()
    }

    /// Number of elements at each exact word length `0..=MAX_DEPTH`.
    pub fn depth_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; MAX_DEPTH as usize + 1];
        for &d in &self.depth {
            if d != UNREACHED {
                counts[d as usize] += 1;
            }
        }
        counts
    }

    /// The generator word recorded for `m`, leftmost first.
    pub fn word(&self, m: PackedMat4) -> Option<Vec<Generator>> {
        let gens = generators();
        let mut cur = m;
        let mut word = Vec::new();
        for _ in 0..self.depth(m)? {
            let (prev, gi) = self.parent[cur.0 as usize];
            word.push(gens[gi as usize]);
            cur = PackedMat4(prev);
        }
        word.reverse();
        Some(word)
    }

    const MAGIC: &'static [u8; 4] = b"BTRS";
    const VERSION: u8 = 1;
    const HEADER: usize = 4 + 1 + 32;

    /// Cache layout: magic `BTRS`, version byte, generator hash, then per
    /// element (in packed order) depth `u8`, parent `u16` LE, generator `u8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::HEADER + 4 * (1 << 16));
        out.extend_from_slice(Self::MAGIC);
        out.push(Self::VERSION);
        out.extend_from_slice(&generator_hash());
        for (d, (p, g)) in self.depth.iter().zip(&self.parent) {
            out.push(*d);
            out.extend_from_slice(&p.to_le_bytes());
            out.push(*g);
        }
        out
    }

    /// Parses and fully re-validates a cache file: every reached element's
    /// parent must sit one level up and multiply back to it, and every
    /// unreached element must be out of reach of the last level.
    pub fn from_bytes(bytes: &[u8]) -> Result<ReachSet> {
        let bad = |msg: &str| Error::Parse(format!("reach-set cache: {msg}"));
        if bytes.len() != Self::HEADER + 4 * (1 << 16) {
            return Err(bad("wrong length"));
        }
        if &bytes[..4] != Self::MAGIC {
            return Err(bad("bad magic"));
        }
        if bytes[4] != Self::VERSION {
            return Err(bad("unsupported version"));
        }
        if bytes[5..Self::HEADER] != generator_hash() {
            return Err(bad("generator hash mismatch"));
        }
        let mut depth = Vec::with_capacity(1 << 16);
        let mut parent = Vec::with_capacity(1 << 16);
        for chunk in bytes[Self::HEADER..].chunks_exact(4) {
            depth.push(chunk[0]);
            parent.push((u16::from_le_bytes([chunk[1], chunk[2]]), chunk[3]));
        }
        let gens: Vec<PackedMat4> = generators().iter().map(|g| g.matrix()).collect();
        for x in 0..=u16::MAX {
            let d = depth[x as usize];
            if x == PackedMat4::IDENTITY.0 {
                if d != 0 {
                    return Err(bad("identity must have depth 0"));
                }
                continue;
            }
            if d == UNREACHED {
                continue;
            }
            let (p, gi) = parent[x as usize];
            let ok = (1..=MAX_DEPTH).contains(&d)
                && (gi as usize) < gens.len()
                && depth[p as usize] == d - 1
                && PackedMat4(p).mul(gens[gi as usize]) == PackedMat4(x);
            if !ok {
                return Err(bad("inconsistent parent pointer"));
            }
        }
        // Minimality: no element may be reachable more cheaply than recorded.
        for x in 0..=u16::MAX {
            let d = depth[x as usize];
            if d == UNREACHED || d == MAX_DEPTH {
                continue;
            }
            for &g in &gens {
                let y = PackedMat4(x).mul(g);
                if depth[y.0 as usize] > d + 1 {
                    return Err(bad("depth table is not a breadth-first closure"));
                }
            }
        }
        Ok(ReachSet { depth, parent })
    }
}

/// Products `F₁ ⋯ F_k` with alternating layer types, one table per prefix
/// length, each with parent pointers.
#[derive(Clone, Debug)]
pub struct AlternatingTable {
    start_lower: bool,
    /// `levels[k][x]` = `Some((prefix, block))` when `x` is a product of
    /// `k` alternating layers.
    levels: Vec<Vec<Option<(u16, u8)>>>,
}

impl AlternatingTable {
    pub fn build(start_lower: bool, len: usize) -> AlternatingTable {
        let mut levels = Vec::with_capacity(len + 1);
        let mut level0 = vec![None; 1 << 16];
        level0[PackedMat4::IDENTITY.0 as usize] = Some((PackedMat4::IDENTITY.0, 0));
        levels.push(level0);
        for k in 1..=len {
            let lower = (k % 2 == 1) == start_lower;
            let prev = &levels[k - 1];
            let mut next = vec![None; 1 << 16];
            for x in 0..=u16::MAX {
                if prev[x as usize].is_none() {
                    continue;
                }
                for a in 0..16u8 {
                    let g = if lower {
                        PackedMat4::lower(a)
                    } else {
                        PackedMat4::upper(a)
                    };
                    let y = PackedMat4(x).mul(g);
                    if next[y.0 as usize].is_none() {
                        next[y.0 as usize] = Some((x, a));
                    }
                }
            }
            levels.push(next);
        }
        AlternatingTable {
            start_lower,
            levels,
        }
    }

    pub fn contains(&self, m: PackedMat4) -> bool {
        self.levels.last().expect("nonempty")[m.0 as usize].is_some()
    }

    /// Blocks `A₁ … A_k` with `m = F₁(A₁) ⋯ F_k(A_k)`.
    pub fn blocks(&self, m: PackedMat4) -> Option<Vec<u8>> {
        let mut cur = m.0;
        let mut out = Vec::new();
        for level in self.levels.iter().skip(1).rev() {
            let (prev, a) = level[cur as usize]?;
            out.push(a);
            cur = prev;
        }
        out.reverse();
        Some(out)
    }

    pub fn starts_lower(&self) -> bool {
        self.start_lower
    }
}

/// Independent five-factor membership test: is `m` in `LULUL ∪ ULULU`?
/// Uses a three-layer prefix table against all two-layer suffixes.
pub fn in_five_by_meet_in_middle(m: PackedMat4) -> bool {
    let table = |first_lower: bool| {
        let mut set = vec![false; 1 << 16];
        for a in 0..16u8 {
            for b in 0..16u8 {
                for c in 0..16u8 {
                    let p = if first_lower {
                        PackedMat4::lower(a)
                            .mul(PackedMat4::upper(b))
                            .mul(PackedMat4::lower(c))
                    } else {
                        PackedMat4::upper(a)
                            .mul(PackedMat4::lower(b))
                            .mul(PackedMat4::upper(c))
                    };
                    set[p.0 as usize] = true;
                }
            }
        }
        set
    };
    mitm_with(&table(true), &table(false), m)
}

fn mitm_with(lul: &[bool], ulu: &[bool], m: PackedMat4) -> bool {
    for d in 0..16u8 {
        for e in 0..16u8 {
            // Over GF(2), U(d)⁻¹ = U(d) and L(e)⁻¹ = L(e).
            let ul_inv = PackedMat4::lower(e).mul(PackedMat4::upper(d));
            if lul[m.mul(ul_inv).0 as usize] {
                return true;
            }
            let lu_inv = PackedMat4::upper(e).mul(PackedMat4::lower(d));
            if ulu[m.mul(lu_inv).0 as usize] {
                return true;
            }
        }
    }
    false
}

/// Outcome of the exhaustive five-layer check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub group_order: usize,
    pub invertible_upper_right: usize,
    pub in_lulul5: usize,
    pub in_five_products: usize,
    pub depth_counts: Vec<usize>,
    pub verified: bool,
    pub elapsed_ms: u128,
}

/// Checks that every element with invertible upper-right block is an
/// `L U L U L` product.
pub fn verify_lemma_sl4gf2() -> Result<LemmaReport> {
    let start = Instant::now();
    let reach = ReachSet::build();
    let lulul = AlternatingTable::build(true, 5);
    let elements = group_elements();
    let candidates: Vec<PackedMat4> = elements
        .iter()
        .copied()
        .filter(|m| m.has_invertible_upper_right())
        .collect();
    let in_lulul5 = candidates.iter().filter(|&&m| lulul.contains(m)).count();
    let in_five = candidates.iter().filter(|&&m| reach.contains(m, 5)).count();
    let report = LemmaReport {
        group_order: elements.len(),
        invertible_upper_right: candidates.len(),
        in_lulul5,
        in_five_products: in_five,
        depth_counts: reach.depth_counts(),
        verified: in_lulul5 == candidates.len() && in_five == candidates.len(),
        elapsed_ms: start.elapsed().as_millis(),
    };
    if !report.verified {
        return Err(Error::VerificationFailed(format!(
            "{} of {} elements with invertible upper-right block are not LULUL products",
            candidates.len() - in_lulul5,
            candidates.len()
        )));
    }
    Ok(report)
}

/// Five-layer `L U L U L` witness for `m` with invertible upper-right block.
pub fn five_layer_lookup_gf2(m: PackedMat4) -> Result<Factorization> {
    five_layer_lookup_in(&AlternatingTable::build(true, 5), m)
}

pub fn five_layer_lookup_in(table: &AlternatingTable, m: PackedMat4) -> Result<Factorization> {
    if !m.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    if !m.has_invertible_upper_right() {
        return Err(Error::SingularUpperRight);
    }
    let blocks = table.blocks(m).ok_or(Error::NotFound)?;
    let layers = blocks
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if i % 2 == 0 {
                BlockLayer::Lower(block_matrix(a))
            } else {
                BlockLayer::Upper(block_matrix(a))
            }
        })
        .collect();
    let f = Factorization {
        kind: FactorizationKind::Lulul5,
        m: 2,
        n: 2,
        field: GF2,
        layers,
    };
    if PackedMat4::from_matrix(&f.evaluate()?)? != m {
        return Err(Error::VerificationFailed(
            "lookup witness differs from M".into(),
        ));
    }
    Ok(f)
}

/// Matrix-level entry point used by the factor pipeline.
pub fn five_layer_lookup_matrix(m: &Matrix) -> Result<Factorization> {
    thread_local! {
        static TABLE: AlternatingTable = AlternatingTable::build(true, 5);
    }
    let packed = PackedMat4::from_matrix(m)?;
    TABLE.with(|t| five_layer_lookup_in(t, packed))
}

/// Elements outside `[BL ∪ BU]⁵`, each re-checked by meet in the middle,
/// confirmed inside `[BL ∪ BU]⁶` and confirmed to have a singular
/// upper-right block.
pub fn find_nonrepresentable() -> Result<Vec<PackedMat4>> {
    find_nonrepresentable_in(&ReachSet::build())
}

pub fn find_nonrepresentable_in(reach: &ReachSet) -> Result<Vec<PackedMat4>> {
    let lul = AlternatingTable::build(true, 3);
    let ulu = AlternatingTable::build(false, 3);
    let lul_set: Vec<bool> = (0..=u16::MAX)
        .map(|x| lul.contains(PackedMat4(x)))
        .collect();
    let ulu_set: Vec<bool> = (0..=u16::MAX)
        .map(|x| ulu.contains(PackedMat4(x)))
        .collect();
    let mut out = Vec::new();
    for m in group_elements() {
        if reach.contains(m, 5) {
            continue;
        }
        if mitm_with(&lul_set, &ulu_set, m) {
            return Err(Error::VerificationFailed(format!(
                "{:#06x} found by meet in the middle but not by BFS",
                m.0
            )));
        }
        if !reach.contains(m, 6) {
            return Err(Error::VerificationFailed(format!(
                "{:#06x} needs more than six",
                m.0
            )));
        }
        if m.has_invertible_upper_right() {
            return Err(Error::VerificationFailed(format!(
                "{:#06x} has invertible upper-right block",
                m.0
            )));
        }
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn packed_agrees_with_matkit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = PackedMat4(rng.gen());
            let b = PackedMat4(rng.gen());
            let prod = &a.to_matrix() * &b.to_matrix();
            assert_eq!(PackedMat4::from_matrix(&prod).unwrap(), a.mul(b));
            match a.inverse() {
                Some(inv) => assert_eq!(inv.to_matrix(), a.to_matrix().inverse().unwrap()),
                None => assert!(!a.to_matrix().is_invertible()),
            }
        }
    }

    #[test]
    fn group_order_matches_formula() {
        let formula: usize = (0..4).map(|i| 16 - (1usize << i)).product();
        assert_eq!(formula, GROUP_ORDER);
        assert_eq!(group_elements().len(), GROUP_ORDER);
    }

    #[test]
    fn generators_are_the_block_layers() {
        let gens = generators();
        assert_eq!(gens.len(), 31);
        for a in 0..16u8 {
            let l = BlockLayer::Lower(block_matrix(a))
                .to_matrix(2, 2, GF2)
                .unwrap();
            assert_eq!(PackedMat4::lower(a).to_matrix(), l);
            let u = BlockLayer::Upper(block_matrix(a))
                .to_matrix(2, 2, GF2)
                .unwrap();
            assert_eq!(PackedMat4::upper(a).to_matrix(), u);
        }
    }

    #[test]
    fn reach_set_basics() {
        let reach = ReachSet::build();
        assert_eq!(reach.depth(PackedMat4::IDENTITY), Some(0));
        assert_eq!(reach.set(0), vec![PackedMat4::IDENTITY]);
        for a in 0..16 {
            assert!(reach.contains(PackedMat4::lower(a), 1));
        }
        for d in 0..MAX_DEPTH {
            let small = reach.set(d);
            assert!(small.iter().all(|&m| reach.contains(m, d + 1)));
            // Inverse of an alternating product is one of the same length.
            assert!(small
                .iter()
                .all(|&m| reach.contains(m.inverse().unwrap(), d)));
        }
        assert!(reach.set(5).len() < GROUP_ORDER);
        assert_eq!(reach.set(6).len(), GROUP_ORDER);
    }

    #[test]
    fn words_reproduce_elements() {
        let reach = ReachSet::build();
        for m in group_elements().into_iter().step_by(37) {
            let word = reach.word(m).unwrap();
            assert_eq!(word.len() as u8, reach.depth(m).unwrap());
            let prod = word
                .iter()
                .fold(PackedMat4::IDENTITY, |acc, g| acc.mul(g.matrix()));
            assert_eq!(prod, m);
        }
    }

    #[test]
    fn five_equals_three_times_two() {
        let reach = ReachSet::build();
        let mut composed = vec![false; 1 << 16];
        let s2 = reach.set(2);
        for a in reach.set(3) {
            for &b in &s2 {
                composed[a.mul(b).0 as usize] = true;
            }
        }
        let composed: Vec<PackedMat4> = (0..=u16::MAX)
            .map(PackedMat4)
            .filter(|m| composed[m.0 as usize])
            .collect();
        assert_eq!(composed, reach.set(5));
    }

    #[test]
    fn lemma_holds() {
        let report = verify_lemma_sl4gf2().unwrap();
        assert!(report.verified);
        assert_eq!(report.group_order, GROUP_ORDER);
        // M₂ ∈ GL₂ (6 ways), M₁, M₄ free (16 each), and the Schur
        // complement M₃ − M₄M₂⁻¹M₁ ∈ GL₂ (6 ways).
        assert_eq!(report.invertible_upper_right, 6 * 16 * 16 * 6);
    }

    #[test]
    fn lookup_examples() {
        let swap = PackedMat4::from_rows([4, 8, 1, 2]);
        let f = five_layer_lookup_gf2(swap).unwrap();
        assert_eq!(
            PackedMat4::from_matrix(&f.evaluate().unwrap()).unwrap(),
            swap
        );
        assert_eq!(
            five_layer_lookup_gf2(PackedMat4::IDENTITY),
            Err(Error::SingularUpperRight)
        );
    }

    #[test]
    fn lookup_sweep() {
        let table = AlternatingTable::build(true, 5);
        for m in group_elements() {
            if m.has_invertible_upper_right() {
                let f = five_layer_lookup_in(&table, m).unwrap();
                assert_eq!(PackedMat4::from_matrix(&f.evaluate().unwrap()).unwrap(), m);
            }
        }
    }

    #[test]
    fn nonrepresentable_witnesses() {
        let reach = ReachSet::build();
        let found = find_nonrepresentable_in(&reach).unwrap();
        assert!(!found.is_empty());
        assert_eq!(found.len(), GROUP_ORDER - reach.set(5).len());
        for m in &found {
            assert!(!in_five_by_meet_in_middle(*m));
            assert!(reach.contains(*m, 6));
        }
    }

    #[test]
    fn cache_round_trip_and_rejection() {
        let reach = ReachSet::build();
        let bytes = reach.to_bytes();
        assert_eq!(ReachSet::from_bytes(&bytes).unwrap(), reach);
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(ReachSet::from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        let idx = ReachSet::HEADER + 4 * PackedMat4::upper(3).0 as usize;
        bad[idx] = 3;
        assert!(ReachSet::from_bytes(&bad).is_err());
        assert!(ReachSet::from_bytes(&bytes[..100]).is_err());
    }
}
