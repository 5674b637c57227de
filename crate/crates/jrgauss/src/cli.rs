//! Command-line front end. Every command returns an [`Outcome`]; `main` only prints it.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use jrgauss_core::algebra::parse_poly;
use jrgauss_core::cayley::{assemble_gaussian, cayley, cayley_inverse, Chart, GroupElement, Partition};
use jrgauss_core::kmform::HoweOperator;
use jrgauss_core::orbint::{orb_group, orb_lie};
use jrgauss_core::pullback::compute_phi_with;
use jrgauss_core::quadrature::{QuadMethod, QuadratureSpec};
use jrgauss_core::sampling::{rng, uniform};
use jrgauss_core::slie::{invariants, match_signature, normal_form_n0, TransferConvention};
use jrgauss_core::transferlab::{chart_point, transfer_polynomial};
use jrgauss_core::ulie::{construct_s, construct_u, orb_unitary, u_invariants, u_vars, UElement};
use jrgauss_core::C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::io::{self, COrbJson, ChartsJson, InvariantJson, NormalFormJson, OrbJson, SElementJson};
use crate::suite::{run_suite, Config, Suite};

#[derive(Parser, Debug)]
#[command(name = "jrgauss", version, about = "Gaussian test functions and orbital integrals for the unitary relative trace formula")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Quadrature tolerance relative to the integral of |f|.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Transfer factor convention on the s side.
    #[arg(long, global = true, value_enum, default_value_t = Eps::Example)]
    pub eps: Eps,
    /// Exponent of the character z/|z| in group-side transfer factors (odd).
    #[arg(long, global = true, default_value_t = 1, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for parallel checks (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the Gaussian Φ on s_{n+1} in canonical form.
    Phi {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Build Φ with the sign of the Howe derivative flipped.
        #[arg(long)]
        negative_control: bool,
    },
    /// Orbital integral of Φ at y ∈ s_{n+1}.
    Orb {
        #[arg(long)]
        n: Option<usize>,
        /// SElement JSON, inline or a path.
        #[arg(long)]
        y: String,
        #[arg(long, value_enum, default_value_t = Method::Trapezoid)]
        method: Method,
    },
    /// Unitary orbital integral of p·Ψ at x ∈ u(V ⊕ C).
    Orbu {
        /// Complex matrix JSON, inline or a path.
        #[arg(long)]
        x: String,
        /// Signature of V as p,q.
        #[arg(long)]
        sig: String,
        /// Polynomial in the entry coordinates re11, im11, ...
        #[arg(long, default_value = "1")]
        p: String,
    },
    /// Group-side orbital integral of the assembled Gaussian at γ.
    Orbg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gamma: String,
        /// {"xis": [[re, im], ...], "margin": r}; the standard charts when omitted.
        #[arg(long)]
        charts: Option<String>,
    },
    /// Orbit invariants of y (s side) or of x with --sig (unitary side).
    Inv {
        #[arg(long, conflicts_with = "x")]
        y: Option<String>,
        #[arg(long, requires = "sig")]
        x: Option<String>,
        #[arg(long)]
        sig: Option<String>,
    },
    /// Signature of the Hermitian space y matches.
    Match {
        #[arg(long)]
        y: String,
    },
    /// Normal form of y matching (n, 0).
    NormalForm {
        #[arg(long)]
        y: String,
    },
    /// Cayley transform c_ξ(γ), or its inverse applied to an SElement with --inverse.
    Cayley {
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        inverse: bool,
        #[arg(long, default_value_t = 1e-9)]
        margin: f64,
    },
    /// Transfer p·Ψ to a Gaussian times an invariant polynomial, with a check table.
    Transfer {
        #[arg(long)]
        n: usize,
        /// Polynomial in re11, im11, ...
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Degree bound for the invariant polynomial.
        #[arg(long)]
        deg: u32,
        /// Matching pairs in the check table.
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
    /// Run acceptance checks.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Build Φ with the sign of the Howe derivative flipped; the suite must fail.
        #[arg(long)]
        negative_control: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Eps {
    Example,
    Zhang,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Method {
    Trapezoid,
    TensorGauss,
    TanhSinh,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteArg {
    All,
    N1,
    N2,
    Cayley,
    Transfer,
    Properties,
}

pub struct Outcome {
    pub code: i32,
    pub text: String,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { code: 0, text }
    }
}

impl Cli {
    fn spec(&self) -> QuadratureSpec {
        let s = QuadratureSpec::default().with_seed(self.seed);
        match self.tol {
            Some(t) => s.with_tolerance(t),
            None => s,
        }
    }

    fn convention(&self) -> TransferConvention {
        match self.eps {
            Eps::Example => TransferConvention::Example,
            Eps::Zhang => TransferConvention::Zhang,
        }
    }

    /// JSON when `--json`, otherwise the text rendering.
    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> Result<Outcome> {
        if self.json {
            Ok(Outcome::ok(serde_json::to_string_pretty(value)?))
        } else {
            Ok(Outcome::ok(text()))
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(t) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let spec = cli.spec();
    match &cli.command {
        Command::Phi { n, format, negative_control } => {
            let op = if *negative_control { HoweOperator::FlippedDerivative } else { HoweOperator::Standard };
            let phi = compute_phi_with(*n, op)?;
            if cli.json || *format == Format::Json {
                let v = json!({ "n": n, "poly": phi.poly.to_string(), "rendering": phi.to_string() });
                Ok(Outcome::ok(serde_json::to_string_pretty(&v)?))
            } else {
                Ok(Outcome::ok(phi.to_string()))
            }
        }
        Command::Orb { n, y, method } => {
            let y = io::read_selement(y)?;
            if let Some(n) = n {
                if *n != y.n() {
                    bail!("--n {n} but y lies in s_{}", y.n() + 1);
                }
            }
            let method = match method {
                Method::Trapezoid => QuadMethod::Trapezoid,
                Method::TensorGauss => QuadMethod::TensorGauss,
                Method::TanhSinh => QuadMethod::TanhSinh,
                Method::MonteCarlo => QuadMethod::MonteCarlo,
            };
            let phi = compute_phi_with(y.n(), HoweOperator::Standard)?;
            let o = orb_lie(&y, &phi, cli.convention(), &spec.with_method(method))?;
            Ok(Outcome::ok(serde_json::to_string_pretty(&OrbJson::from(&o))?))
        }
        Command::Orbu { x, sig, p } => {
            let sig = io::parse_signature(sig)?;
            let x = UElement::new(io::read_complex(x)?, sig)?;
            let p = parse_poly(p, &u_vars(x.n()))?;
            let o = orb_unitary(&x, &p, &spec)?;
            Ok(Outcome::ok(serde_json::to_string_pretty(&OrbJson::from(&o))?))
        }
        Command::Orbg { n, gamma, charts } => {
            let g = GroupElement::new(io::read_complex(gamma)?)?;
            if g.n() != *n {
                bail!("--n {n} but gamma is {}x{}", g.n() + 1, g.n() + 1);
            }
            let partition = match charts {
                Some(c) => {
                    let c: ChartsJson = io::read_json(c)?;
                    Some(Partition { xis: c.xis.iter().map(|z| C64::new(z[0], z[1])).collect(), margin: c.margin })
                }
                None => None,
            };
            let f = assemble_gaussian(*n, cli.m, partition, cli.seed)?;
            let o = orb_group(&g, &f, &spec)?;
            Ok(Outcome::ok(serde_json::to_string_pretty(&COrbJson::from(&o))?))
        }
        Command::Inv { y, x, sig } => {
            let inv = match (y, x, sig) {
                (Some(y), None, _) => invariants(&io::read_selement(y)?)?,
                (None, Some(x), Some(sig)) => u_invariants(&UElement::new(io::read_complex(x)?, io::parse_signature(sig)?)?)?,
                _ => bail!("give either --y or --x with --sig"),
            };
            let j = InvariantJson::from(&inv);
            Ok(Outcome::ok(serde_json::to_string_pretty(&j)?))
        }
        Command::Match { y } => {
            let (p, q) = match_signature(&io::read_selement(y)?)?;
            cli.emit(&json!({ "signature": [p, q] }), || format!("({p}, {q})"))
        }
        Command::NormalForm { y } => {
            let nf = normal_form_n0(&io::read_selement(y)?)?;
            Ok(Outcome::ok(serde_json::to_string_pretty(&NormalFormJson::from(&nf))?))
        }
        Command::Cayley { xi, gamma, inverse, margin } => {
            let xi = io::parse_complex(xi)?;
            if *inverse {
                let g = cayley_inverse(&io::read_selement(gamma)?, xi)?;
                Ok(Outcome::ok(serde_json::to_string_pretty(&io::complex_rows(g.m()))?))
            } else {
                let g = GroupElement::new(io::read_complex(gamma)?)?;
                let y = cayley(&g, &Chart::new(xi, *margin)?)?;
                Ok(Outcome::ok(serde_json::to_string_pretty(&SElementJson::from(&y))?))
            }
        }
        Command::Transfer { n, p, deg, samples } => transfer(cli, *n, p, *deg, *samples, &spec),
        Command::Verify { suite, negative_control } => {
            let suite = match suite {
                SuiteArg::All => Suite::All,
                SuiteArg::N1 => Suite::N1,
                SuiteArg::N2 => Suite::N2,
                SuiteArg::Cayley => Suite::Cayley,
                SuiteArg::Transfer => Suite::Transfer,
                SuiteArg::Properties => Suite::Properties,
            };
            let op = if *negative_control { HoweOperator::FlippedDerivative } else { HoweOperator::Standard };
            let reports = run_suite(suite, &Config { op, seed: cli.seed });
            let code = if reports.iter().all(|r| r.pass) { 0 } else { 1 };
            let text = if cli.json {
                serde_json::to_string_pretty(&reports)?
            } else {
                let mut t = String::new();
                for r in &reports {
                    writeln!(t, "{r}")?;
                    for c in &r.checks {
                        writeln!(t, "    {:<4} {}: got {}, expected {} (tol {})", if c.pass { "ok" } else { "FAIL" }, c.check, c.got, c.expected, c.tolerance)?;
                    }
                }
                t.trim_end().to_string()
            };
            Ok(Outcome { code, text })
        }
    }
}

#[derive(Serialize)]
struct TransferRow {
    invariant: InvariantJson,
    matching: bool,
    s_side: f64,
    unitary_side: f64,
    diff: f64,
}

fn transfer(cli: &Cli, n: usize, p: &str, deg: u32, samples: usize, spec: &QuadratureSpec) -> Result<Outcome> {
    let p = parse_poly(p, &u_vars(n)).context("parsing --p")?;
    let t = transfer_polynomial(n, &p, deg, spec)?;
    let mut r = rng(cli.seed);
    let mut rows = Vec::new();
    for k in 0..=samples {
        let mut lambda: Vec<f64> = (0..n).map(|j| 0.8 - 1.6 * j as f64 / n as f64 + uniform(&mut r, -0.2, 0.2) / n as f64).collect();
        lambda.sort_by(|a, b| b.total_cmp(a));
        let mut w: Vec<f64> = (0..n).map(|_| uniform(&mut r, 0.1, 0.6)).collect();
        // the last row is a non-matching control
        let matching = k < samples;
        if !matching {
            w[0] = -w[0];
        }
        let inv = chart_point(&lambda, &w, uniform(&mut r, -0.5, 0.5));
        let s_side = orb_lie(&construct_s(&inv)?, &t.phi, cli.convention(), spec)?.value;
        let unitary_side = if matching { orb_unitary(&construct_u(&inv, (n, 0))?, &p, spec)?.value } else { 0.0 };
        rows.push(TransferRow { invariant: (&inv).into(), matching, s_side, unitary_side, diff: (s_side - unitary_side).abs() });
    }
    let v: Value = json!({ "f": t.quotient.f.to_string(), "fit_residual": t.quotient.residual, "phi": t.phi.to_string(), "checks": rows });
    cli.emit(&v, || {
        let mut s = format!("f   = {}\nphi = {}\n\n{:<9} {:>22} {:>22} {:>10}\n", t.quotient.f, t.phi, "pair", "Orb(y, f Phi)", "Orb(x, p Psi)", "diff");
        for (k, row) in rows.iter().enumerate() {
            let label = if row.matching { format!("{k}") } else { "control".into() };
            let _ = writeln!(s, "{label:<9} {:>22.15e} {:>22.15e} {:>10.2e}", row.s_side, row.unitary_side, row.diff);
        }
        s.trim_end().to_string()
    })
}
