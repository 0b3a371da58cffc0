//! The `qcat` command line, as a library so tests can drive it without a
//! subprocess. [`run`] never touches stdout or the process exit code.

use std::collections::BTreeMap;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qcat_core::classification::classify;
use qcat_core::cohomology::{alternating_bicharacters, bicharacter_to_cocycle, h2};
use qcat_core::invariant::{
    extract_ce, make_ec, raw_operator, solve_normalized, verify_cocycle_identity,
    verify_invariance, BlockCocycle, Invariance, VerifyMethod,
};
use qcat_core::lattice::{
    cartan_matrix, dominant_weights_up_to, fundamental_group, weyl_dim, DynkinType,
    FiniteAbelianGroup, Weight,
};
use qcat_core::monoid::{
    extend_to_lattice, kernel_contains_roots, monoid_commutator, restrict_to_monoid,
};
use qcat_core::uqg::{check_tau_identity, is_whitelisted, ModuleCache, QParam, TauCheckMode};
use qcat_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest `|A|` accepted by `h2`, counted as the number of cyclic factors.
pub const MAX_H2_FACTORS: usize = 64;
/// Truncation bounds accepted by the `verify` subcommands.
pub const MAX_CLI_BOUND: i64 = 8;
/// Above this tensor dimension the τ identity is checked on the generator image only.
const FULL_MATRIX_DIM: u128 = 4096;
/// Largest cocycle file accepted by `verify cocycle`.
pub const MAX_COCYCLE_FILE_BYTES: u64 = 16 << 20;
/// Pairs whose tensor product exceeds this dimension are skipped by the invariance check.
const INVARIANCE_DIM: u128 = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "qcat",
    version,
    about = "Twisted autoequivalences of quantum group module categories"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// P/Q, H²(P/Q; T), diagram automorphisms and the autoequivalence group.
    Classify { ty: DynkinType },
    /// P/Q with its projection from the weight lattice.
    FundamentalGroup { ty: DynkinType },
    /// H²(A; T) for A = Z/m1 × … × Z/mk.
    H2 {
        #[arg(required = true, num_args = 1..)]
        factors: Vec<u64>,
    },
    /// Verification pipelines; exit 1 and the violated constraint on failure.
    Verify {
        #[command(subcommand)]
        check: Verify,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// The τ/T identity on every admissible triple up to the bound.
    TauIdentity {
        ty: DynkinType,
        /// Defaults to $QCAT_DEFAULT_Q, then 2.
        #[arg(long)]
        q: Option<QParam>,
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
    /// Builds E_c for the k-th H² class and runs the round trip.
    Ec {
        ty: DynkinType,
        #[arg(long, default_value_t = 1)]
        class: usize,
        /// Defaults to 6 for rank <= 2 and 3 otherwise.
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long)]
        q: Option<QParam>,
        /// Include the blocks of E_c in the JSON document under `cocycle`.
        #[arg(long)]
        with_blocks: bool,
    },
    /// Checks a block cocycle read from a JSON file, in the format of the
    /// `cocycle` field of `verify ec --with-blocks --format json`.
    Cocycle {
        file: std::path::PathBuf,
        #[arg(long)]
        q: Option<QParam>,
    },
    /// Normalized cocycles on A1 up to the bound.
    Prop2 {
        #[arg(long, default_value_t = 3)]
        bound: i64,
        #[arg(long)]
        q: Option<QParam>,
    },
}

/// What a command produced: exit code, stdout and stderr text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(stderr: String) -> Self {
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr,
        }
    }
}

/// A verification result rendered in both formats from one JSON document.
struct Report {
    passed: bool,
    doc: Value,
    text: String,
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome::ok(text)
            } else {
                Outcome::usage(text)
            };
        }
    };
    let format = cli.format;
    match dispatch(cli.command) {
        Ok(r) => {
            let stdout = match format {
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&r.doc).expect("serializable")
                ),
                Format::Text => r.text,
            };
            let code = if r.passed {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            };
            Outcome {
                code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => match format {
            Format::Json => Outcome {
                code: EXIT_USAGE,
                stdout: format!("{}\n", json!({ "error": e.to_string() })),
                stderr: String::new(),
            },
            Format::Text => Outcome::usage(format!("error: {e}\n")),
        },
    }
}

fn dispatch(cmd: Command) -> Result<Report, Error> {
    match cmd {
        Command::Classify { ty } => {
            let r = classify(ty);
            Ok(Report {
                passed: true,
                doc: serde_json::to_value(&r)?,
                text: format!("{r}\n"),
            })
        }
        Command::FundamentalGroup { ty } => Ok(fundamental_group_report(ty)),
        Command::H2 { factors } => h2_report(&factors),
        Command::Verify { check } => match check {
            Verify::TauIdentity { ty, q, bound } => verify_tau(ty, resolve_q(q)?, bound),
            Verify::Ec {
                ty,
                class,
                bound,
                q,
                with_blocks,
            } => {
                let bound = bound.unwrap_or(if ty.rank() <= 2 { 6 } else { 3 });
                verify_ec(ty, class, bound, resolve_q(q)?, with_blocks)
            }
            Verify::Cocycle { file, q } => verify_cocycle_file(&file, resolve_q(q)?),
            Verify::Prop2 { bound, q } => verify_prop2(bound, resolve_q(q)?),
        },
    }
}

fn resolve_q(q: Option<QParam>) -> Result<QParam, Error> {
    match q {
        Some(q) => Ok(q),
        None => QParam::default_q(),
    }
}

fn check_bound(bound: i64) -> Result<(), Error> {
    if !(1..=MAX_CLI_BOUND).contains(&bound) {
        return Err(Error::Precondition(format!(
            "--bound must lie in 1..={MAX_CLI_BOUND}, got {bound}"
        )));
    }
    Ok(())
}

fn fundamental_group_report(ty: DynkinType) -> Report {
    let proj = fundamental_group(ty);
    let g = proj.group();
    let images: Vec<Vec<u64>> = (0..ty.rank())
        .map(|i| proj.project(&Weight::fundamental(ty.rank(), i)))
        .collect();
    let det = cartan_matrix(ty).determinant();
    let mut text = format!("type: {ty}\nP/Q: {g} (order {})\ndet A: {det}\n", g.order());
    for (i, x) in images.iter().enumerate() {
        text.push_str(&format!("ω{} ↦ {x:?}\n", i + 1));
    }
    Report {
        passed: true,
        doc: json!({
            "type": ty.to_string(),
            "factors": g.factors(),
            "order": g.order(),
            "cartan_determinant": det,
            "fundamental_weight_images": images,
        }),
        text,
    }
}

fn h2_report(orders: &[u64]) -> Result<Report, Error> {
    if orders.len() > MAX_H2_FACTORS {
        return Err(Error::TooLarge(format!(
            "at most {MAX_H2_FACTORS} cyclic factors"
        )));
    }
    let g = FiniteAbelianGroup::from_cyclic_orders(orders)?;
    let h = h2(&g);
    Ok(Report {
        passed: true,
        doc: json!({
            "group": g.factors(),
            "h2_factors": h.factors(),
            "h2_order": h.order(),
        }),
        text: format!("{h}\n"),
    })
}

fn verify_tau(ty: DynkinType, q: QParam, bound: i64) -> Result<Report, Error> {
    check_bound(bound)?;
    if !is_whitelisted(ty) {
        return Err(Error::OutsideWhitelist(ty.to_string()));
    }
    let r = ty.rank();
    let weights = dominant_weights_up_to(r, bound);
    let mut cache = ModuleCache::new(ty, q.clone());
    let mut checked = 0;
    for i in 0..r {
        let admissible: Vec<&Weight> = weights.iter().filter(|w| w.get(i) >= 1).collect();
        for mu in &admissible {
            for eta in &admissible {
                for nu in &admissible {
                    let dim = weyl_dim(ty, mu)? * weyl_dim(ty, eta)? * weyl_dim(ty, nu)?;
                    let mode = if dim <= FULL_MATRIX_DIM {
                        TauCheckMode::FullMatrix
                    } else {
                        TauCheckMode::GeneratorImage
                    };
                    let c = check_tau_identity(&mut cache, i, mu, eta, nu, mode)?;
                    if !c.passed() {
                        let what = if !c.holds {
                            "identity fails".to_string()
                        } else if !c.independent {
                            "left-hand morphisms are dependent".to_string()
                        } else {
                            format!("multiplicity {} instead of 2", c.multiplicity)
                        };
                        return Ok(Report {
                            passed: false,
                            doc: json!({
                                "ok": false, "type": ty.to_string(), "q": q.to_string(), "bound": bound,
                                "checked": checked,
                                "violation": {
                                    "i": i + 1, "mu": mu.to_string(), "eta": eta.to_string(), "nu": nu.to_string(),
                                    "holds": c.holds, "independent": c.independent,
                                    "multiplicity": c.multiplicity, "detail": what,
                                },
                            }),
                            text: format!(
                                "FAILED at i={}, μ={mu}, η={eta}, ν={nu}: {what}\n",
                                i + 1
                            ),
                        });
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(Report {
        passed: true,
        doc: json!({ "ok": true, "type": ty.to_string(), "q": q.to_string(), "bound": bound, "checked": checked }),
        text: format!(
            "τ identity holds on {checked} admissible triples of {ty} (q = {q}, bound {bound})\n"
        ),
    })
}

fn failure(doc: &mut Value, text: &mut String, step: &str, detail: String) -> Report {
    doc["ok"] = json!(false);
    doc["failed_step"] = json!(step);
    doc["violation"] = json!(detail);
    text.push_str(&format!("FAILED {step}: {detail}\n"));
    Report {
        passed: false,
        doc: doc.clone(),
        text: text.clone(),
    }
}

/// Blocks recovered from the explicit operators must match the stored ones.
fn invariance_round_trip(e: &BlockCocycle, q: &QParam) -> Result<Result<usize, String>, Error> {
    let ty = e.dynkin_type();
    let mut cache = ModuleCache::new(ty, q.clone());
    let mut ops = BTreeMap::new();
    let pairs: std::collections::BTreeSet<(Weight, Weight)> = e
        .blocks()
        .keys()
        .map(|(m, h, _)| (m.clone(), h.clone()))
        .collect();
    for (mu, eta) in pairs {
        if weyl_dim(ty, &mu)? * weyl_dim(ty, &eta)? > INVARIANCE_DIM {
            continue;
        }
        let op = raw_operator(e, &mut cache, &mu, &eta)?;
        ops.insert((mu, eta), op);
    }
    match verify_invariance(&mut cache, &ops)? {
        Invariance::NotInvariant { mu, eta, generator } => Ok(Err(format!(
            "operator on V_{mu} ⊗ V_{eta} does not commute with {generator}"
        ))),
        Invariance::Invariant { blocks } => {
            for (key, b) in &blocks {
                let stored = e.block(&key.0, &key.1, &key.2)?;
                if stored.to_matrix()? != b.to_matrix()? {
                    return Ok(Err(format!(
                        "block ({}|{}|{}) is not recovered",
                        key.0, key.1, key.2
                    )));
                }
            }
            Ok(Ok(ops.len()))
        }
    }
}

fn verify_ec(
    ty: DynkinType,
    class: usize,
    bound: i64,
    q: QParam,
    with_blocks: bool,
) -> Result<Report, Error> {
    check_bound(bound)?;
    let g = fundamental_group(ty).group().clone();
    let classes = alternating_bicharacters(&g);
    let b = classes.get(class).ok_or_else(|| {
        Error::Precondition(format!(
            "{ty} has {} H² classes; --class must be below that",
            classes.len()
        ))
    })?;
    let c = bicharacter_to_cocycle(b)?;
    let e = make_ec(ty, &c, bound)?;
    let mut doc = json!({
        "ok": true, "type": ty.to_string(), "class": class, "bound": bound, "q": q.to_string(),
        "blocks": e.blocks().len(),
    });
    if with_blocks {
        doc["cocycle"] = e.to_json();
    }
    let mut text = format!(
        "E_c for {ty}, class {class} of {}, bound {bound}: {} blocks\n",
        classes.len(),
        e.blocks().len()
    );

    let check = verify_cocycle_identity(&e, VerifyMethod::Auto, &q)?;
    if let Some(v) = &check.violation {
        let detail = format!("at ({}, {}, {}): {}", v.mu, v.eta, v.nu, v.detail);
        return Ok(failure(&mut doc, &mut text, "cocycle identity", detail));
    }
    doc["cocycle_identity"] =
        json!({ "method": format!("{:?}", check.method), "triples": check.triples_checked });
    text.push_str(&format!(
        "cocycle identity: {} triples ({:?})\n",
        check.triples_checked, check.method
    ));

    if is_whitelisted(ty) {
        match invariance_round_trip(&e, &q)? {
            Ok(n) => {
                doc["invariance"] = json!({ "pairs": n });
                text.push_str(&format!(
                    "invariance: {n} operators commute with the coproduct, blocks recovered\n"
                ));
            }
            Err(detail) => return Ok(failure(&mut doc, &mut text, "invariance", detail)),
        }
    } else {
        doc["invariance"] = json!("skipped: no explicit modules for this type");
        text.push_str("invariance: skipped, no explicit modules for this type\n");
    }

    let ce = extract_ce(&e)?;
    let restricted = restrict_to_monoid(ty, &c, bound)?;
    if ce != restricted {
        let bad = ce
            .values()
            .iter()
            .find(|(k, v)| restricted.values().get(*k) != Some(*v))
            .map(|((m, h), v)| format!("c_E({m}, {h}) = {v}"))
            .unwrap_or_else(|| "domains differ".into());
        return Ok(failure(&mut doc, &mut text, "extraction", bad));
    }
    let ext = extend_to_lattice(&monoid_commutator(&ce))?;
    let descended = ext.bicharacter.descend_to_pq()?;
    if &descended != b {
        return Ok(failure(
            &mut doc,
            &mut text,
            "commutator",
            "commutator of c_E differs from the class".into(),
        ));
    }
    if !kernel_contains_roots(&ext.bicharacter) {
        return Ok(failure(
            &mut doc,
            &mut text,
            "roots",
            "some b(α_i, ·) is nontrivial".into(),
        ));
    }
    doc["extraction"] =
        json!({ "pairs": ce.values().len(), "commutator_nonzero": !descended.is_zero() });
    text.push_str(&format!(
        "extraction: c_E matches the class on {} pairs, commutator {}, roots in the kernel\n",
        ce.values().len(),
        if descended.is_zero() {
            "trivial"
        } else {
            "nontrivial"
        }
    ));
    Ok(Report {
        passed: true,
        doc,
        text,
    })
}

fn verify_cocycle_file(path: &std::path::Path, q: QParam) -> Result<Report, Error> {
    let io = |e: std::io::Error| Error::Parse(format!("{}: {e}", path.display()));
    if std::fs::metadata(path).map_err(io)?.len() > MAX_COCYCLE_FILE_BYTES {
        return Err(Error::TooLarge(format!(
            "{} exceeds {MAX_COCYCLE_FILE_BYTES} bytes",
            path.display()
        )));
    }
    let e = BlockCocycle::from_json_str(&std::fs::read_to_string(path).map_err(io)?)?;
    let ty = e.dynkin_type();
    let mut doc = json!({
        "ok": true, "type": ty.to_string(), "bound": e.bound(), "q": q.to_string(), "blocks": e.blocks().len(),
    });
    let mut text = format!(
        "{}: {ty}, bound {}, {} blocks\n",
        path.display(),
        e.bound(),
        e.blocks().len()
    );
    let check = verify_cocycle_identity(&e, VerifyMethod::Auto, &q)?;
    if let Some(v) = &check.violation {
        let detail = format!("at ({}, {}, {}): {}", v.mu, v.eta, v.nu, v.detail);
        return Ok(failure(&mut doc, &mut text, "cocycle identity", detail));
    }
    doc["cocycle_identity"] =
        json!({ "method": format!("{:?}", check.method), "triples": check.triples_checked });
    text.push_str(&format!(
        "cocycle identity: {} triples ({:?})\n",
        check.triples_checked, check.method
    ));
    if is_whitelisted(ty) {
        match invariance_round_trip(&e, &q)? {
            Ok(n) => {
                doc["invariance"] = json!({ "pairs": n });
                text.push_str(&format!(
                    "invariance: {n} operators commute with the coproduct, blocks recovered\n"
                ));
            }
            Err(detail) => return Ok(failure(&mut doc, &mut text, "invariance", detail)),
        }
    }
    Ok(Report {
        passed: true,
        doc,
        text,
    })
}

fn verify_prop2(bound: i64, q: QParam) -> Result<Report, Error> {
    check_bound(bound)?;
    let fixed = solve_normalized(bound, true, &q)?;
    let loose = solve_normalized(bound, false, &q)?;
    let unknowns: Vec<String> = fixed
        .unknowns
        .iter()
        .map(|(m, h, n)| format!("({m}|{h}|{n})"))
        .collect();
    let doc = json!({
        "ok": fixed.is_unique(),
        "bound": bound,
        "q": q.to_string(),
        "unknowns": unknowns,
        "constraints": fixed.constraints,
        "free_rank": fixed.free_rank,
        "torsion": fixed.torsion,
        "without_tau": { "free_rank": loose.free_rank, "torsion": loose.torsion },
    });
    let mut text = if fixed.is_unique() {
        "unique solution: identity\n".to_string()
    } else {
        format!(
            "FAILED: solution set has free rank {} and torsion {:?} over {} unknowns\n",
            fixed.free_rank,
            fixed.torsion,
            unknowns.len()
        )
    };
    text.push_str(&format!(
        "{} unknowns, {} constraints; without the τ condition: free rank {}\n",
        unknowns.len(),
        fixed.constraints,
        loose.free_rank
    ));
    Ok(Report {
        passed: fixed.is_unique(),
        doc,
        text,
    })
}
