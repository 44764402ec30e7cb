//! Command-line front end for the charp engine.
//!
//! Expressions are parsed over `F_p(vars)` declared by the global flags;
//! `--let NAME=EXPR` binds abbreviations usable in later expressions. The
//! default Witt length / modulus exponent is `--r`.
//!
//! Exit status: 0 on success (and on affirmative verdicts such as "zero" or
//! a fully passing battery), 1 on a negative or undecided verdict or an
//! engine error, 2 on usage errors.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use charp::{
    cartier, classify_closed, form_d, form_dlog, h_filtration, h_is_tame, h_is_unramified,
    h_is_zero, h_normalize, h_residue, h_simple_form, inverse_cartier, k_dlog, k_is_zero,
    k_normalize, k_residue, parse_hsym, parse_ksym, parse_ratfunc, parse_valuation, parse_witt,
    solve_artin_schreier, verify_battery, witt_add, witt_frobenius, witt_mul, witt_pmul,
    BatterySpec, Bindings, ClosedFormClassification, FieldContext, Verdict,
};

const SCHEMA: u32 = 1;

/// Symbolic mod-p^r arithmetic over function fields: Witt vectors,
/// differential forms, Milnor symbols, and Witt-coefficient symbols.
#[derive(Parser)]
#[command(
    name = "charp",
    version,
    after_help = "Environment:\n  CHARP_TABLE_CACHE  directory used to persist the universal Witt \
                  arithmetic tables\n                     between runs (they are expensive to \
                  derive for large p^r)."
)]
struct Cli {
    /// Ground field characteristic.
    #[arg(long, global = true, default_value_t = 2)]
    prime: u64,

    /// Witt length / modulus exponent.
    #[arg(long, global = true, default_value_t = 1)]
    r: usize,

    /// Comma-separated transcendental generators, e.g. "x,y,t".
    #[arg(long, global = true, value_delimiter = ',', default_value = "x")]
    vars: Vec<String>,

    /// Abbreviation NAME=EXPR usable in later expressions; repeatable.
    #[arg(long = "let", global = true, value_name = "NAME=EXPR")]
    lets: Vec<String>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated Witt vector arithmetic.
    Witt {
        #[command(subcommand)]
        op: WittOp,
    },
    /// Kähler differential forms and the Cartier operator.
    Form {
        #[command(subcommand)]
        op: FormOp,
    },
    /// Milnor symbol sums modulo an integer.
    Ksym {
        #[command(subcommand)]
        op: KsymOp,
    },
    /// Witt-coefficient symbol sums.
    Hsym {
        #[command(subcommand)]
        op: HsymOp,
    },
    /// Reproducible verification batteries.
    Verify {
        #[command(subcommand)]
        battery: VerifyCmd,
    },
    /// Solve g^p - g = f over the rational function field.
    SolveAs {
        /// The right-hand side f.
        #[arg(long)]
        expr: String,
    },
}

#[derive(Args)]
struct BinaryWitt {
    /// Left operand, e.g. "(x, y+1)".
    #[arg(long)]
    lhs: String,
    /// Right operand.
    #[arg(long)]
    rhs: String,
}

#[derive(Args)]
struct UnaryWitt {
    /// Operand, e.g. "(x, y+1)".
    #[arg(long)]
    lhs: String,
}

#[derive(Subcommand)]
enum WittOp {
    /// Witt vector addition.
    Add(BinaryWitt),
    /// Witt vector multiplication.
    Mul(BinaryWitt),
    /// Componentwise Frobenius.
    Frob(UnaryWitt),
    /// Multiplication by p (Verschiebung of the Frobenius).
    Pmul(UnaryWitt),
}

#[derive(Args)]
struct FormArgs {
    /// Coefficient function a in a·dlog(b1)∧...∧dlog(bn).
    #[arg(long, default_value = "1")]
    coeff: String,
    /// One dlog factor; repeatable, in order.
    #[arg(long = "dlog", value_name = "EXPR")]
    dlogs: Vec<String>,
}

#[derive(Subcommand)]
enum FormOp {
    /// Exterior derivative.
    D(FormArgs),
    /// Cartier operator (errors when the form is not closed).
    Cartier(FormArgs),
    /// Inverse Cartier operator.
    InverseCartier(FormArgs),
    /// Iterated-Cartier classification of a closed form.
    Classify(FormArgs),
}

#[derive(Args)]
struct KsymArgs {
    /// Symbol sum, e.g. "3*{x, y} - {x+1, y}"; a trailing "@m" fixes the
    /// modulus.
    #[arg(long)]
    expr: String,
    /// Modulus override; defaults to prime^r.
    #[arg(long, alias = "ell")]
    modulus: Option<u64>,
}

#[derive(Subcommand)]
enum KsymOp {
    /// Rewrite into normal form.
    Normalize(KsymArgs),
    /// Tame residue at a divisor.
    Residue {
        #[command(flatten)]
        sym: KsymArgs,
        /// Divisor, e.g. "x = 0" or "inf(x)".
        #[arg(long)]
        at: String,
    },
    /// The dlog differential form (modulus p only).
    Dlog(KsymArgs),
    /// Decide vanishing with a certificate.
    Iszero(KsymArgs),
}

#[derive(Args)]
struct HsymArgs {
    /// Symbol sum, e.g. "[x, y | t} + 2*[0, 1 | x, t}".
    #[arg(long)]
    expr: String,
}

#[derive(Subcommand)]
enum HsymOp {
    /// Rewrite into normal form.
    Normalize(HsymArgs),
    /// Residue at a divisor.
    Residue {
        #[command(flatten)]
        sym: HsymArgs,
        #[arg(long)]
        at: String,
    },
    /// Ramification filtration level at a divisor.
    Filtration {
        #[command(flatten)]
        sym: HsymArgs,
        #[arg(long)]
        at: String,
    },
    /// Pole-level decomposition at a divisor (Witt length 1).
    Simpleform {
        #[command(flatten)]
        sym: HsymArgs,
        #[arg(long)]
        at: String,
    },
    /// Ramification kind at a divisor: unramified, tame, or wild.
    Classify {
        #[command(flatten)]
        sym: HsymArgs,
        #[arg(long)]
        at: String,
    },
    /// Decide vanishing with a certificate.
    Iszero(HsymArgs),
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Characteristic-2 battery (Witt lengths 1-3).
    Char2,
    /// Characteristic-3 battery (Witt lengths 1-2).
    Char3,
    /// Battery for characteristic >= 5 (Witt lengths 1-2).
    Charp {
        /// Characteristic; defaults to the global --prime.
        #[arg(long)]
        p: Option<u64>,
    },
    /// Coprime-modulus battery.
    ModEll {
        /// Coefficient modulus: 3 or 5 over characteristic 2, 4 over
        /// characteristic 3.
        #[arg(long)]
        ell: u64,
    },
}

/// A failure with the exit status it should produce.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<charp::Error> for Failure {
    fn from(e: charp::Error) -> Failure {
        match e {
            charp::Error::Parse { .. } | charp::Error::UndeclaredVariable(_) => {
                Failure::usage(e.to_string())
            }
            _ => Failure::check(e.to_string()),
        }
    }
}

struct Session {
    ctx: FieldContext,
    bindings: Bindings,
    r: usize,
    format: Format,
}

impl Session {
    fn new(cli: &Cli) -> Result<Session, Failure> {
        let names: Vec<&str> = cli.vars.iter().map(|s| s.as_str()).collect();
        let ctx = FieldContext::new(cli.prime, &names)?;
        let mut bindings = Bindings::new();
        for decl in &cli.lets {
            let (name, expr) = decl
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("--let needs NAME=EXPR, got `{decl}`")))?;
            let value = parse_ratfunc(&ctx, expr.trim(), &bindings)?;
            bindings.insert(name.trim(), value);
        }
        if cli.r == 0 {
            return Err(Failure::usage("--r must be at least 1"));
        }
        Ok(Session {
            ctx,
            bindings,
            r: cli.r,
            format: cli.format,
        })
    }

    fn default_modulus(&self) -> Result<u64, Failure> {
        self.ctx
            .p()
            .checked_pow(self.r as u32)
            .ok_or_else(|| Failure::usage("prime^r exceeds the supported modulus range"))
    }

    /// Splits a trailing "@m" off a Milnor literal.
    fn ksym_modulus(&self, args: &KsymArgs) -> Result<(String, u64), Failure> {
        if let Some((body, tail)) = args.expr.rsplit_once('@') {
            let m: u64 = tail
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("bad modulus suffix `@{tail}`")))?;
            if args.modulus.is_some_and(|flag| flag != m) {
                return Err(Failure::usage(
                    "--modulus disagrees with the @m suffix on the expression",
                ));
            }
            return Ok((body.to_string(), m));
        }
        let m = match args.modulus {
            Some(m) => m,
            None => self.default_modulus()?,
        };
        Ok((args.expr.clone(), m))
    }

    fn emit(&self, op: &str, text: String, mut payload: Value) -> u8 {
        match self.format {
            Format::Text => println!("{text}"),
            Format::Json => {
                payload["schema"] = json!(SCHEMA);
                payload["op"] = json!(op);
                println!("{payload}");
            }
        }
        0
    }

    fn emit_verdict(&self, op: &str, verdict: &Verdict) -> u8 {
        let status = match verdict {
            Verdict::Zero(_) => "zero",
            Verdict::NonZero(_) => "nonzero",
            Verdict::Unknown(_) => "unknown",
        };
        self.emit(
            op,
            verdict.to_string(),
            json!({ "verdict": status, "detail": verdict.to_string() }),
        );
        match verdict {
            Verdict::Zero(_) => 0,
            _ => 1,
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let session = Session::new(cli)?;
    let ctx = &session.ctx;
    let binds = &session.bindings;
    match &cli.command {
        Command::Witt { op } => {
            let (name, out) = match op {
                WittOp::Add(b) => (
                    "witt.add",
                    witt_add(
                        &parse_witt(ctx, &b.lhs, binds)?,
                        &parse_witt(ctx, &b.rhs, binds)?,
                    )?,
                ),
                WittOp::Mul(b) => (
                    "witt.mul",
                    witt_mul(
                        &parse_witt(ctx, &b.lhs, binds)?,
                        &parse_witt(ctx, &b.rhs, binds)?,
                    )?,
                ),
                WittOp::Frob(u) => ("witt.frob", witt_frobenius(&parse_witt(ctx, &u.lhs, binds)?)),
                WittOp::Pmul(u) => ("witt.pmul", witt_pmul(&parse_witt(ctx, &u.lhs, binds)?)),
            };
            Ok(session.emit(name, out.to_string(), json!({ "result": out.to_string() })))
        }
        Command::Form { op } => {
            let build = |args: &FormArgs| -> Result<_, Failure> {
                let a = parse_ratfunc(ctx, &args.coeff, binds)?;
                let bs = args
                    .dlogs
                    .iter()
                    .map(|d| parse_ratfunc(ctx, d, binds))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(form_dlog(&a, &bs)?)
            };
            match op {
                FormOp::D(a) => {
                    let out = form_d(&build(a)?);
                    Ok(session.emit("form.d", out.to_string(), json!({ "result": out.to_string() })))
                }
                FormOp::Cartier(a) => {
                    let out = cartier(&build(a)?)?;
                    Ok(session.emit(
                        "form.cartier",
                        out.to_string(),
                        json!({ "result": out.to_string() }),
                    ))
                }
                FormOp::InverseCartier(a) => {
                    let out = inverse_cartier(&build(a)?);
                    Ok(session.emit(
                        "form.inverse-cartier",
                        out.to_string(),
                        json!({ "result": out.to_string() }),
                    ))
                }
                FormOp::Classify(a) => {
                    let out = classify_closed(&build(a)?)?;
                    let (text, payload) = match &out {
                        ClosedFormClassification::NotClosed => {
                            ("not closed".to_string(), json!({ "classification": "not-closed" }))
                        }
                        ClosedFormClassification::Exact => {
                            ("exact".to_string(), json!({ "classification": "exact" }))
                        }
                        ClosedFormClassification::LogDecomposition { iterations, parts } => {
                            let rendered: Vec<String> = parts
                                .iter()
                                .map(|(a, psi)| format!("({a})^p · [{psi}]"))
                                .collect();
                            (
                                format!(
                                    "logarithmic content after {iterations} Cartier steps: {}",
                                    rendered.join(" + ")
                                ),
                                json!({
                                    "classification": "log-decomposition",
                                    "iterations": iterations,
                                    "parts": parts
                                        .iter()
                                        .map(|(a, psi)| json!({
                                            "coefficient": a.to_string(),
                                            "logarithmic": psi.to_string(),
                                        }))
                                        .collect::<Vec<_>>(),
                                }),
                            )
                        }
                    };
                    Ok(session.emit("form.classify", text, payload))
                }
            }
        }
        Command::Ksym { op } => match op {
            KsymOp::Normalize(args) => {
                let (body, m) = session.ksym_modulus(args)?;
                let out = k_normalize(&parse_ksym(ctx, m, &body, binds)?);
                Ok(session.emit(
                    "ksym.normalize",
                    out.to_string(),
                    json!({ "result": out.to_string(), "modulus": m }),
                ))
            }
            KsymOp::Residue { sym, at } => {
                let (body, m) = session.ksym_modulus(sym)?;
                let v = parse_valuation(ctx, at, binds)?;
                let out = k_residue(&parse_ksym(ctx, m, &body, binds)?, &v)?;
                Ok(session.emit(
                    "ksym.residue",
                    out.to_string(),
                    json!({ "result": out.to_string(), "modulus": m, "at": v.to_string() }),
                ))
            }
            KsymOp::Dlog(args) => {
                let (body, m) = session.ksym_modulus(args)?;
                let out = k_dlog(&parse_ksym(ctx, m, &body, binds)?)?;
                Ok(session.emit(
                    "ksym.dlog",
                    out.to_string(),
                    json!({ "result": out.to_string() }),
                ))
            }
            KsymOp::Iszero(args) => {
                let (body, m) = session.ksym_modulus(args)?;
                let verdict = k_is_zero(&parse_ksym(ctx, m, &body, binds)?);
                Ok(session.emit_verdict("ksym.iszero", &verdict))
            }
        },
        Command::Hsym { op } => match op {
            HsymOp::Normalize(args) => {
                let out = h_normalize(&parse_hsym(ctx, &args.expr, binds)?)?;
                Ok(session.emit(
                    "hsym.normalize",
                    out.to_string(),
                    json!({ "result": out.to_string() }),
                ))
            }
            HsymOp::Residue { sym, at } => {
                let v = parse_valuation(ctx, at, binds)?;
                let out = h_residue(&parse_hsym(ctx, &sym.expr, binds)?, &v)?;
                Ok(session.emit(
                    "hsym.residue",
                    out.to_string(),
                    json!({ "result": out.to_string(), "at": v.to_string() }),
                ))
            }
            HsymOp::Filtration { sym, at } => {
                let v = parse_valuation(ctx, at, binds)?;
                let report = h_filtration(&parse_hsym(ctx, &sym.expr, binds)?, &v)?;
                Ok(session.emit(
                    "hsym.filtration",
                    report.to_string(),
                    json!({
                        "wild": report.is_wild(),
                        "level": report.level,
                        "report": report.to_string(),
                        "at": v.to_string(),
                    }),
                ))
            }
            HsymOp::Simpleform { sym, at } => {
                let v = parse_valuation(ctx, at, binds)?;
                let dec = h_simple_form(&parse_hsym(ctx, &sym.expr, binds)?, &v)?;
                let mut text = String::new();
                for level in &dec.levels {
                    text.push_str(&format!("level {}: {}", level.level, level.phi));
                    if let Some(pp) = &level.phi_prime {
                        text.push_str(&format!("  (dlog-t part: {pp})"));
                    }
                    text.push('\n');
                }
                text.push_str(&format!("tame part: {}", dec.tame_part));
                let payload = json!({
                    "at": v.to_string(),
                    "levels": dec
                        .levels
                        .iter()
                        .map(|l| json!({
                            "level": l.level,
                            "phi": l.phi.to_string(),
                            "phi_prime": l.phi_prime.as_ref().map(|p| p.to_string()),
                        }))
                        .collect::<Vec<_>>(),
                    "tame_part": dec.tame_part.to_string(),
                });
                Ok(session.emit("hsym.simpleform", text, payload))
            }
            HsymOp::Classify { sym, at } => {
                let v = parse_valuation(ctx, at, binds)?;
                let s = parse_hsym(ctx, &sym.expr, binds)?;
                let (kind, detail) = match h_is_unramified(&s, &v) {
                    Verdict::Zero(reason) => ("unramified", reason.to_string()),
                    Verdict::Unknown(m) => ("undecided", m),
                    Verdict::NonZero(_) => match h_is_tame(&s, &v) {
                        Verdict::Zero(_) => {
                            ("tame", "ramified with vanishing wild part".to_string())
                        }
                        Verdict::NonZero(w) => ("wild", w.to_string()),
                        Verdict::Unknown(m) => ("undecided", m),
                    },
                };
                let code = u8::from(kind == "undecided");
                session.emit(
                    "hsym.classify",
                    format!("{kind}: {detail}"),
                    json!({ "ramification": kind, "detail": detail, "at": v.to_string() }),
                );
                Ok(code)
            }
            HsymOp::Iszero(args) => {
                let verdict = h_is_zero(&parse_hsym(ctx, &args.expr, binds)?);
                Ok(session.emit_verdict("hsym.iszero", &verdict))
            }
        },
        Command::Verify { battery } => {
            let spec = match battery {
                VerifyCmd::Char2 => BatterySpec::CharTwo { witt_len: cli.r },
                VerifyCmd::Char3 => BatterySpec::CharThree { witt_len: cli.r },
                VerifyCmd::Charp { p } => BatterySpec::CharP {
                    p: p.unwrap_or(cli.prime),
                    witt_len: cli.r,
                },
                VerifyCmd::ModEll { ell } => BatterySpec::CoprimeModulus {
                    p: cli.prime,
                    modulus: *ell,
                },
            };
            let report = verify_battery(spec)?;
            match session.format {
                Format::Text => println!("{report}"),
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
            }
            Ok(u8::from(!report.all_pass() || report.has_unknown()))
        }
        Command::SolveAs { expr } => {
            let f = parse_ratfunc(ctx, expr, binds)?;
            match solve_artin_schreier(&f)? {
                Some(g) => Ok(session.emit(
                    "solve-as",
                    g.to_string(),
                    json!({ "solution": g.to_string() }),
                )),
                None => {
                    session.emit("solve-as", "no solution".to_string(), json!({ "solution": null }));
                    Ok(1)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
