use std::fs;
use std::path::Path;

use blocktri_core::commutator::commutator_decompose;
use blocktri_core::couplingio::{
    bit_size_report, lift_to_rational, nice_network, reconstruction_error, to_coupling_network,
    DiagStrategy,
};
use blocktri_core::factor::{six_layer_factor_gl, six_layer_factor_sl};
use blocktri_core::io::{
    factorization_to_json, matrix_body, matrix_from_json, matrix_to_json, network_to_json,
    parse_diag, parse_factorization, parse_json, report_to_json, to_pretty, with_schema,
};
use blocktri_core::obstruction::{
    block_diagonal, build_blockdiag_witness, build_perm_witness, perm_sweep, spectra_obstruction,
    trace_obstruction, ObstructionReport,
};
use blocktri_core::sl4gf2::{find_nonrepresentable_in, verify_lemma_sl4gf2, Generator, ReachSet};
use blocktri_core::{Elem, Error, Field, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{
    Cli, Command, DiagStrategyArg, ExportArgs, FactorArgs, Failure, ObstructArgs, ObstructMode,
    Outcome, PermsweepArgs, RandomArgs, RandomKind, Sl4gf2Args, VerifyArgs, WitnessArgs,
    WitnessKind,
};

type CmdResult = Result<Outcome, Failure>;

/// Attaches a context object to library errors.
trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> Value) -> Result<T, Failure>;
}

impl<T> Context<T> for blocktri_core::Result<T> {
    fn context(self, ctx: impl FnOnce() -> Value) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(e.code(), e.to_string(), ctx()))
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    let field = cli.field;
    match &cli.command {
        Command::Factor(args) => factor(args, field),
        Command::Verify(args) => verify(args, field),
        Command::Commutator(args) => commutator(&args.input, field),
        Command::Obstruct(args) => obstruct(args, field),
        Command::Witness(args) => witness(args, field.unwrap_or(Field::Rational)),
        Command::Permsweep(args) => permsweep(args, field),
        Command::Sl4gf2(args) => sl4gf2(args),
        Command::ExportCoupling(args) => export_coupling(args, field),
        Command::Random(args) => random(args, field.unwrap_or(Field::Rational)),
    }
}

fn ok(report: Value) -> CmdResult {
    Ok(Outcome { status: 0, report })
}

fn verdict(pass: bool, report: Value) -> CmdResult {
    Ok(Outcome {
        status: if pass { 0 } else { 1 },
        report,
    })
}

fn path_ctx(path: &Path) -> Value {
    json!({ "path": path.display().to_string() })
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new("io", e.to_string(), path_ctx(path)))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new("io", e.to_string(), path_ctx(path)))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    write_text(path, &to_pretty(v))
}

/// Reads a matrix document, replacing its field when `field` is given.
fn read_matrix(path: &Path, field: Option<Field>) -> Result<Matrix, Failure> {
    let mut v = parse_json(&read_text(path)?).context(|| path_ctx(path))?;
    if let (Some(f), Some(obj)) = (field, v.as_object_mut()) {
        obj.insert("field".into(), json!(f.to_string()));
    }
    matrix_from_json(&v).context(|| path_ctx(path))
}

fn factor(args: &FactorArgs, field: Option<Field>) -> CmdResult {
    let ctx = || path_ctx(&args.input);
    let mut m = read_matrix(&args.input, field)?;
    if m.field() == Field::F64 {
        m = lift_to_rational(&m).context(ctx)?;
    }
    let f = if args.gl {
        let d = match &args.diag {
            Some(path) => {
                let (dfield, d) = parse_diag(&read_text(path)?).context(|| path_ctx(path))?;
                if dfield != m.field() {
                    let e = Error::FieldMismatch(m.field(), dfield);
                    return Err(Failure::new(e.code(), e.to_string(), path_ctx(path)));
                }
                d
            }
            None => corner_diag(&m).context(ctx)?,
        };
        six_layer_factor_gl(&m, &d).context(ctx)?
    } else {
        six_layer_factor_sl(&m).context(ctx)?
    };
    let doc = factorization_to_json(&f);
    match &args.output {
        Some(path) => {
            write_json(path, &doc)?;
            ok(json!({
                "command": "factor",
                "kind": f.kind,
                "field": f.field.to_string(),
                "m": f.m,
                "n": f.n,
                "layers": f.layers.len(),
                "verified": true,
                "output": path.display().to_string(),
            }))
        }
        None => ok(doc),
    }
}

/// `diag(det M, 1, ..., 1)` over the half size.
fn corner_diag(m: &Matrix) -> blocktri_core::Result<Vec<Elem>> {
    if !m.is_square() || !m.rows().is_multiple_of(2) {
        return Err(Error::OddDimension(m.rows()));
    }
    let field = m.field();
    let mut d = vec![field.one(); m.rows() / 2];
    if let Some(first) = d.first_mut() {
        *first = m.det()?.into_elem();
    }
    Ok(d)
}

fn to_float(m: &Matrix) -> blocktri_core::Result<Matrix> {
    let field = m.field();
    let rows = (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|e| field.to_f64(e).map(Elem::Float))
                .collect()
        })
        .collect::<blocktri_core::Result<Vec<Vec<Elem>>>>()?;
    Matrix::from_rows(Field::F64, rows)
}

fn verify(args: &VerifyArgs, field: Option<Field>) -> CmdResult {
    let m = read_matrix(&args.input, field)?;
    let fctx = || path_ctx(&args.factorization);
    let f = parse_factorization(&read_text(&args.factorization)?).context(fctx)?;
    let base = json!({ "command": "verify", "field": f.field.to_string(), "kind": f.kind });
    let size_ok = m.is_square() && m.rows() == f.m + f.n;
    if m.field() != Field::F64 && f.field != Field::F64 {
        if m.field() != f.field {
            let e = Error::FieldMismatch(m.field(), f.field);
            return Err(Failure::new(e.code(), e.to_string(), fctx()));
        }
        let verified = size_ok && f.reproduces(&m).context(fctx)?;
        return verdict(
            verified,
            merge(base, json!({ "exact": true, "verified": verified })),
        );
    }
    if !size_ok {
        return verdict(
            false,
            merge(base, json!({ "exact": false, "verified": false })),
        );
    }
    let product = to_float(&f.evaluate().context(fctx)?).context(fctx)?;
    let target = to_float(&m).context(|| path_ctx(&args.input))?;
    let diff = product.checked_sub(&target).context(fctx)?;
    let error = diff.norm_inf().context(fctx)? / target.norm_inf().context(fctx)?.max(1.0);
    let verified = error <= args.tolerance;
    verdict(
        verified,
        merge(
            base,
            json!({ "exact": false, "relative_error": error, "tolerance": args.tolerance, "verified": verified }),
        ),
    )
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(x), Value::Object(y)) = (a.as_object_mut(), b) {
        x.extend(y);
    }
    a
}

fn commutator(input: &Path, field: Option<Field>) -> CmdResult {
    let m = read_matrix(input, field)?;
    match commutator_decompose(&m) {
        Ok(pair) => ok(json!({ "X": matrix_body(&pair.x), "Y": matrix_body(&pair.y) })),
        Err(e @ Error::NoDecomposition { .. }) => verdict(
            false,
            json!({ "command": "commutator", "commutator": false, "message": e.to_string() }),
        ),
        Err(e) => Err(Failure::new(e.code(), e.to_string(), path_ctx(input))),
    }
}

fn report_verdict(report: &ObstructionReport, extra: Value) -> CmdResult {
    verdict(report.obstructed, merge(report_to_json(report), extra))
}

fn obstruct(args: &ObstructArgs, field: Option<Field>) -> CmdResult {
    let m1 = read_matrix(&args.m1, field)?;
    let m4 = read_matrix(&args.m4, field)?;
    let ctx =
        || json!({ "m1": args.m1.display().to_string(), "m4": args.m4.display().to_string() });
    let report = match args.mode {
        ObstructMode::Trace => trace_obstruction(&m1, &m4),
        ObstructMode::Spectra => spectra_obstruction(&m1, &m4),
    }
    .context(ctx)?;
    report_verdict(&report, json!({}))
}

fn witness(args: &WitnessArgs, field: Field) -> CmdResult {
    let ctx = || json!({ "m": args.m, "n": args.n, "field": field.to_string() });
    let (w, report) = match args.kind {
        WitnessKind::Blockdiag => {
            let (x, y) = build_blockdiag_witness(args.m, args.n, field).context(ctx)?;
            let xi = x.inverse().context(ctx)?;
            let w = block_diagonal(&xi, &y).context(ctx)?;
            (w, trace_obstruction(&xi, &y).context(ctx)?)
        }
        WitnessKind::DiagPerm => {
            let w = build_perm_witness(args.m, args.n, field).context(ctx)?;
            let report = perm_sweep(&w, args.m, args.n).context(ctx)?;
            (w, report)
        }
    };
    if let Some(path) = &args.output {
        write_json(path, &matrix_to_json(&w))?;
    }
    report_verdict(
        &report,
        json!({ "split": [args.m, args.n], "witness": matrix_body(&w) }),
    )
}

fn permsweep(args: &PermsweepArgs, field: Option<Field>) -> CmdResult {
    let d = read_matrix(&args.input, field)?;
    let report = perm_sweep(&d, args.m, args.n).context(|| path_ctx(&args.input))?;
    report_verdict(&report, json!({}))
}

fn load_reach(cache: Option<&Path>) -> Result<ReachSet, Failure> {
    let Some(path) = cache else {
        return Ok(ReachSet::build());
    };
    if path.exists() {
        let bytes =
            fs::read(path).map_err(|e| Failure::new("io", e.to_string(), path_ctx(path)))?;
        return ReachSet::from_bytes(&bytes).context(|| path_ctx(path));
    }
    let reach = ReachSet::build();
    fs::write(path, reach.to_bytes())
        .map_err(|e| Failure::new("io", e.to_string(), path_ctx(path)))?;
    Ok(reach)
}

fn generator_name(g: Generator) -> String {
    match g {
        Generator::Lower(a) => format!("L{a:x}"),
        Generator::Upper(a) => format!("U{a:x}"),
    }
}

fn sl4gf2(args: &Sl4gf2Args) -> CmdResult {
    let mut report = json!({ "command": "sl4gf2" });
    let mut pass = true;
    if args.verify_lemma5 {
        let lemma = match verify_lemma_sl4gf2() {
            Ok(r) => {
                let mut v = serde_json::to_value(&r).expect("reports serialize");
                // Timings would make the output nondeterministic.
                v.as_object_mut().expect("object").remove("elapsed_ms");
                v
            }
            Err(e @ Error::VerificationFailed(_)) => {
                pass = false;
                json!({ "verified": false, "message": e.to_string() })
            }
            Err(e) => return Err(Failure::new(e.code(), e.to_string(), json!({}))),
        };
        report = merge(report, json!({ "lemma": lemma }));
    }
    if args.find_nonrepresentable {
        let reach = load_reach(args.cache.as_deref())?;
        let found = match find_nonrepresentable_in(&reach) {
            Ok(found) => found,
            Err(e) => return Err(Failure::new(e.code(), e.to_string(), json!({}))),
        };
        let witnesses: Vec<Value> = found
            .iter()
            .map(|&w| {
                let word: Vec<String> = reach
                    .word(w)
                    .unwrap_or_default()
                    .into_iter()
                    .map(generator_name)
                    .collect();
                json!({
                    "packed": format!("{:#06x}", w.0),
                    "depth": reach.depth(w),
                    "word": word,
                    "matrix": matrix_body(&w.to_matrix()),
                })
            })
            .collect();
        pass &= !witnesses.is_empty();
        let summary = json!({ "count": witnesses.len(), "depth_counts": reach.depth_counts() });
        match &args.output {
            Some(path) => {
                write_json(
                    path,
                    &with_schema(merge(summary.clone(), json!({ "witnesses": witnesses }))),
                )?;
                report = merge(
                    report,
                    json!({ "nonrepresentable": summary, "output": path.display().to_string() }),
                );
            }
            None => {
                report = merge(
                    report,
                    json!({ "nonrepresentable": merge(summary, json!({ "witnesses": witnesses })) }),
                );
            }
        }
    }
    verdict(pass, report)
}

fn export_coupling(args: &ExportArgs, field: Option<Field>) -> CmdResult {
    let ctx = || path_ctx(&args.input);
    let m = read_matrix(&args.input, field)?;
    let (net, f) = if args.nice {
        nice_network(&m)
    } else {
        let strategy = match args.diag_strategy {
            DiagStrategyArg::Corner => DiagStrategy::Corner,
            DiagStrategyArg::Balanced => DiagStrategy::Balanced,
        };
        to_coupling_network(&m, strategy)
    }
    .context(ctx)?;
    let error = reconstruction_error(&net, &m).context(ctx)?;
    let doc = network_to_json(&net);
    let summary = json!({
        "command": "export-coupling",
        "kind": f.kind,
        "split": [f.m, f.n],
        "layers": net.layers.len(),
        "reconstruction_error": error,
        "bit_size": bit_size_report(&f),
    });
    match &args.output {
        Some(path) => {
            write_json(path, &doc)?;
            ok(merge(
                summary,
                json!({ "output": path.display().to_string() }),
            ))
        }
        None => ok(merge(summary, json!({ "network": doc }))),
    }
}

fn random(args: &RandomArgs, field: Field) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let n = args.size;
    if n == 0 {
        return Err(Failure::new(
            "dimension_too_small",
            "size must be positive",
            json!({ "size": n }),
        ));
    }
    let m = match args.kind {
        RandomKind::General => Matrix::random(field, n, n, &mut rng),
        RandomKind::Invertible => Matrix::random_invertible(field, n, &mut rng),
        RandomKind::Special => Matrix::random_special(field, n, &mut rng),
    };
    let doc = matrix_to_json(&m);
    match &args.output {
        Some(path) => {
            write_json(path, &doc)?;
            ok(
                json!({ "command": "random", "field": field.to_string(), "size": n, "output": path.display().to_string() }),
            )
        }
        None => ok(doc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_diag_carries_the_determinant() {
        let q = Field::Rational;
        let m = Matrix::from_ints(q, &[&[2, 0], &[0, 3]]);
        assert_eq!(corner_diag(&m).unwrap(), vec![q.from_int(6)]);
        assert!(corner_diag(&Matrix::identity(q, 3)).is_err());
    }

    #[test]
    fn merge_overrides_keys() {
        assert_eq!(
            merge(json!({ "a": 1, "b": 2 }), json!({ "b": 3 })),
            json!({ "a": 1, "b": 3 })
        );
    }

    #[test]
    fn to_float_rejects_finite_fields() {
        assert!(to_float(&Matrix::identity(Field::Prime(5), 2)).is_err());
        let m = to_float(&Matrix::from_ints(Field::Rational, &[&[1, 2]])).unwrap();
        assert_eq!(m.get(0, 1), &Elem::Float(2.0));
    }
}
