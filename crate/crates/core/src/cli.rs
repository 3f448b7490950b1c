//! Command-line front end. Every command produces a text block and a JSON
//! value; `--format` picks one. Mathematical obstructions exit with 2, user
//! and precondition errors with 3, a failing `verify` battery with 1.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::apps::{drinfeld, germ, ode, tougeron, wavrik};
use crate::arcspace::{self, arc_space, Jet, StratumTag};
use crate::error::{Error, Result};
use crate::nmatrix::{self, RowFiniteMatrix};
use crate::series::{io, parse, vec_order, Order, Series, SeriesVec, Space, Sp, Val, Q};
use crate::textile::Kappa;
use crate::verify;

#[derive(Parser, Debug)]
#[command(name = "felt", version, about = "Exact power-series linearization: arc lifting, ODEs and implicit-function lifts")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Validity of the returned series.
    #[arg(long, global = true)]
    pub order: Option<i64>,
    /// Coefficient ring, `Q` or `Q[e]/e^N`.
    #[arg(long, global = true)]
    pub ring: Option<String>,
    /// Weights of the series variables, comma separated. Only uniform weights
    /// are accepted by the current commands.
    #[arg(long = "L", global = true)]
    pub weights: Option<String>,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Rows materialized by the infinite Gauss algorithm.
    #[arg(long = "work-bound", global = true)]
    pub work_bound: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lift a jet of `f = 0` to an arc.
    LiftArc {
        /// Polynomial, or `;`-separated polynomials with `--general`.
        #[arg(long)]
        poly: String,
        #[arg(long)]
        jet: PathBuf,
        /// Complete-intersection path through the Smith form.
        #[arg(long)]
        general: bool,
    },
    /// Stratum `(i, e')` of a jet.
    Classify {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        jet: PathBuf,
    },
    /// Fiber coordinates of an arc over its level-`e` truncation.
    Trivialize {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        arc: PathBuf,
        #[arg(long)]
        level: i64,
    },
    /// Explicit ODE system `x^(q) = P(x, ..., x^(q-1))`.
    Ode {
        #[arg(long)]
        system: PathBuf,
        /// `D^j x_i(0)`: comma separated per component, components split by `;`.
        #[arg(long)]
        init: String,
    },
    /// Solve `F(x, y) = 0` from a representation `F(x, 0) = sum c_ij delta_i delta_j`.
    Tougeron {
        #[arg(long = "F")]
        f: String,
        #[arg(long)]
        rep: PathBuf,
    },
    /// Lift an approximate root of `F(x, y) = 0`.
    Wavrik {
        #[arg(long = "F")]
        f: String,
        #[arg(long)]
        approx: PathBuf,
        #[arg(long)]
        agree: i64,
    },
    /// Solve `f(u) = b` with linear part `lambda`.
    InvertGerm {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Rows split by `;`, entries by `,`.
        #[arg(long)]
        lambda: String,
    },
    /// Deform an arc over a test ring.
    Drinfeld {
        #[arg(long)]
        f: String,
        #[arg(long)]
        gamma0: PathBuf,
        #[arg(long)]
        q: String,
        #[arg(long)]
        xbar: PathBuf,
        #[arg(long)]
        ybar: PathBuf,
        #[arg(long, default_value_t = 2)]
        r: u32,
        /// Free parameter, one `t`-polynomial per line; zero if omitted.
        #[arg(long)]
        xi: Option<PathBuf>,
    },
    /// Canonical form of a row-finite matrix.
    Canonical {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        window: usize,
    },
    /// Run a property battery.
    Verify { suite: String },
}

/// Rendered result of one command.
pub struct Output {
    pub text: String,
    pub json: Value,
    pub exit: i32,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json") + "\n",
        }
    }
}

pub fn error_output(e: &Error) -> Output {
    Output {
        text: format!("error {}: {e}\n", e.code()),
        json: json!({"status": "error", "code": e.code(), "message": e.to_string()}),
        exit: e.exit_code(),
    }
}

pub struct Rendered {
    pub out: String,
    pub exit: i32,
    /// Text-format errors and usage messages go to stderr.
    pub stderr: bool,
}

/// Parses `argv`, runs the command and renders the result.
pub fn run(argv: &[String]) -> Rendered {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let exit = if e.use_stderr() { 3 } else { 0 };
            return Rendered { out: e.to_string(), exit, stderr: exit != 0 };
        }
    };
    let out = dispatch(&cli).unwrap_or_else(|e| error_output(&e));
    Rendered { out: out.render(cli.global.format), exit: out.exit, stderr: out.exit == 3 && cli.global.format == Format::Text }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn order_of(g: &Global) -> Result<i64> {
    match g.order {
        Some(n) if n >= 0 => Ok(n),
        Some(n) => Err(Error::Parse(format!("--order must be nonnegative, got {n}"))),
        None => Err(Error::Parse("--order is required".into())),
    }
}

fn nil_of(g: &Global) -> Result<u32> {
    g.ring.as_deref().map_or(Ok(1), io::parse_ring)
}

fn check_weights(g: &Global) -> Result<()> {
    if let Some(w) = &g.weights {
        let ws = io::parse_weights(w)?;
        if ws.iter().any(|x| *x <= crate::series::q(0)) {
            return Err(Error::Parse("weights must be positive".into()));
        }
        if ws.windows(2).any(|p| p[0] != p[1]) {
            return Err(Error::Unsupported("non-uniform weights; these commands work in uniformly weighted spaces".into()));
        }
    }
    Ok(())
}

fn lines(src: &str) -> Vec<&str> {
    src.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).collect()
}

fn poly_in(src: &str, names: &[String], sp: &Sp) -> Result<Series> {
    parse::parse_poly(src, names, sp)
}

/// A series file, or one polynomial in `var` per line.
fn read_univariate(path: &Path, var: &str, sp: &Sp) -> Result<SeriesVec> {
    let src = read(path)?;
    if src.trim_start().starts_with("nvars=") {
        let v = io::read_text(&src)?;
        if v.iter().any(|s| s.n() != 1) {
            return Err(Error::DomainMismatch(format!("{} must hold univariate series", path.display())));
        }
        return Ok(v.into_iter().map(|s| s.in_space(&crate::series::unify(sp, &s.sp))).collect());
    }
    let names = vec![var.to_string()];
    lines(&src)
        .into_iter()
        .map(|l| poly_in(l.split_once(':').map_or(l, |(_, r)| r), &names, sp))
        .collect()
}

fn parse_polys(srcs: &[&str]) -> Result<SeriesVec> {
    let names = parse::infer_names(srcs)?;
    let sp = Space::uniform(names.len(), 1);
    srcs.iter().map(|s| poly_in(s, &names, &sp)).collect()
}

fn read_jet(path: &Path) -> Result<Jet> {
    let (level, rows) = arcspace::parse_jet_file(&read(path)?)?;
    let level = level.ok_or_else(|| Error::Parse(format!("{}: missing level=<e> line", path.display())))?;
    Ok(Jet::from_rationals(&rows, level))
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<Q>>> {
    s.split(';').map(|row| row.split(',').map(|x| parse::parse_rational(x.trim())).collect()).collect()
}

fn order_str(o: Order) -> String {
    match o {
        Order::Attained(w) => w.to_string(),
        Order::AtLeast(w) => format!(">={w}"),
        Order::Infinite => "inf".into(),
    }
}

fn kappa_str(k: Kappa) -> String {
    match k {
        Kappa::Fin(v) => v.to_string(),
        Kappa::Infinite => "inf".into(),
    }
}

fn residual_order(r: &[Series]) -> String {
    if r.iter().all(|s| s.is_zero()) {
        match crate::series::vec_val(r) {
            Val::Upto(t) => format!(">{t}"),
            Val::Exact => "inf".into(),
        }
    } else {
        order_str(vec_order(r))
    }
}

fn tag_json(t: &StratumTag) -> Value {
    json!({
        "i": t.i,
        "e_prime": t.e_prime,
        "ord_f": order_str(t.ord_f),
        "partial_orders": t.partial_orders.iter().map(|o| order_str(*o)).collect::<Vec<_>>(),
    })
}

fn tag_text(t: &StratumTag) -> String {
    let parts: Vec<String> = t.partial_orders.iter().map(|o| order_str(*o)).collect();
    format!("stratum: i={} e'={} ord_f={} partials=[{}]\n", t.i, t.e_prime, order_str(t.ord_f), parts.join(", "))
}

fn series_json(v: &[Series]) -> Value {
    serde_json::to_value(io::to_json(v)).expect("series json")
}

struct Builder {
    text: String,
    json: serde_json::Map<String, Value>,
}

impl Builder {
    fn new(command: &str) -> Self {
        let mut json = serde_json::Map::new();
        json.insert("status".into(), json!("ok"));
        json.insert("command".into(), json!(command));
        Builder { text: String::new(), json }
    }

    fn field(&mut self, key: &str, text: impl std::fmt::Display, value: Value) -> &mut Self {
        let _ = writeln!(self.text, "{key}: {text}");
        self.json.insert(key.into(), value);
        self
    }

    fn kappa(&mut self, key: &str, k: Kappa) -> &mut Self {
        self.field(key, kappa_str(k), json!(kappa_str(k)))
    }

    fn series(&mut self, key: &str, v: &[Series]) -> &mut Self {
        let _ = write!(self.text, "{key}:\n{}", io::write_text(v));
        self.json.insert(key.into(), series_json(v));
        self
    }

    fn residual(&mut self, r: &[Series]) -> &mut Self {
        let o = residual_order(r);
        self.field("residual_order", &o, json!(o))
    }

    fn done(&mut self) -> Output {
        Output { text: std::mem::take(&mut self.text), json: Value::Object(std::mem::take(&mut self.json)), exit: 0 }
    }
}

pub fn dispatch(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    check_weights(g)?;
    match &cli.cmd {
        Command::LiftArc { poly, jet, general } => {
            let n = order_of(g)?;
            let jet = read_jet(jet)?;
            let srcs: Vec<&str> = if *general { poly.split(';').map(str::trim).collect() } else { vec![poly.as_str()] };
            let fs = parse_polys(&srcs)?;
            let mut b = Builder::new("lift-arc");
            if *general {
                let lift = arcspace::lift_jet_general(&fs, &jet, n)?;
                b.field("eps", format!("{:?}", lift.eps), json!(lift.eps));
                b.residual(&lift.residual).series("arc", &lift.arc);
            } else {
                let lift = arcspace::lift_jet_hypersurface(&fs[0], &jet, n)?;
                let ch = arcspace::chart(&fs[0], &jet, None, 8)?;
                if let Some(t) = &lift.tag {
                    let _ = write!(b.text, "{}", tag_text(t));
                    b.json.insert("stratum".into(), tag_json(t));
                }
                b.kappa("kappa_f", ch.bundle.f.kappa).kappa("kappa_sigma", ch.bundle.sigma.kappa).kappa("kappa_sigma_h", ch.bundle.sigma_h.kappa);
                b.residual(&lift.residual).series("arc", &lift.arc);
            }
            Ok(b.done())
        }
        Command::Classify { poly, jet } => {
            let jet = read_jet(jet)?;
            let f = parse_polys(&[poly.as_str()])?;
            let tag = arcspace::classify_jet(&f[0], &jet)?;
            let mut b = Builder::new("classify");
            let _ = write!(b.text, "{}", tag_text(&tag));
            b.json.insert("stratum".into(), tag_json(&tag));
            Ok(b.done())
        }
        Command::Trivialize { poly, arc, level } => {
            let n = order_of(g)?;
            let f = parse_polys(&[poly.as_str()])?;
            let arc = read_univariate(arc, "t", &arc_space())?;
            let (ch, z) = arcspace::trivialize(&f[0], &arc, *level, n)?;
            let mut b = Builder::new("trivialize");
            let _ = write!(b.text, "{}", tag_text(&ch.tag));
            b.json.insert("stratum".into(), tag_json(&ch.tag));
            b.kappa("kappa_sigma_h", ch.bundle.sigma_h.kappa);
            b.series("base", &ch.jet.values).series("fiber", &z);
            Ok(b.done())
        }
        Command::Ode { system, init } => {
            let n = order_of(g)?;
            let sys = ode::OdeSystem::parse(&read(system)?, init)?;
            let sol = ode::solve_ode(&sys, n)?;
            let mut b = Builder::new("ode");
            b.field("q", sys.q, json!(sys.q)).kappa("kappa_sigma_h", sol.kappa_sigma_h);
            b.residual(&sol.residual).series("x", &sol.x);
            Ok(b.done())
        }
        Command::Tougeron { f, rep } => {
            let n = order_of(g)?;
            let inst = tougeron::TougeronInstance::parse(f, &read(rep)?)?;
            let lift = tougeron::tougeron_lift(&inst, n)?;
            let mut b = Builder::new("tougeron");
            let m = lift.membership.describe();
            b.kappa("kappa_sigma_h", lift.kappa_sigma_h).field("membership", &m, json!(m));
            b.residual(std::slice::from_ref(&lift.residual)).series("y", &lift.y);
            Ok(b.done())
        }
        Command::Wavrik { f, approx, agree } => {
            let n = order_of(g)?;
            let fs = parse_polys(&[f.as_str()])?;
            if fs[0].n() != 2 {
                return Err(Error::DomainMismatch("F must involve exactly the variables x and y".into()));
            }
            let ybar = read_univariate(approx, "x", &arc_space())?;
            let ybar = ybar.first().ok_or_else(|| Error::Parse("empty approximation file".into()))?;
            let w = wavrik::wavrik_lift(&fs[0], ybar, *agree, n)?;
            let mut b = Builder::new("wavrik");
            b.field("e", w.e, json!(w.e)).field("ord_f", order_str(w.ord_f), json!(order_str(w.ord_f)));
            if let Some(d) = w.disc_order {
                b.field("disc_order", order_str(d), json!(order_str(d)));
            }
            if let Some(k) = w.kappa_sigma_h {
                b.kappa("kappa_sigma_h", k);
            }
            b.residual(std::slice::from_ref(&w.residual)).series("y", std::slice::from_ref(&w.y));
            Ok(b.done())
        }
        Command::InvertGerm { f, b: bpath, lambda } => {
            let n = order_of(g)?;
            let fsrc = read(f)?;
            let bsrc = read(bpath)?;
            let (fl, bl) = (lines(&fsrc), lines(&bsrc));
            let all: Vec<&str> = fl.iter().chain(&bl).copied().collect();
            let mut names = parse::infer_names(&all)?;
            if names.len() < fl.len() {
                names = (1..=fl.len()).map(|i| format!("x{i}")).collect();
            }
            let sp = Space::uniform(names.len(), 1);
            let fs = fl.iter().map(|s| poly_in(s, &names, &sp)).collect::<Result<SeriesVec>>()?;
            let bs = bl.iter().map(|s| poly_in(s, &names, &sp)).collect::<Result<SeriesVec>>()?;
            let lam = parse_matrix(lambda)?;
            let r = germ::invert_germ(&fs, &bs, &lam, n)?;
            let mut b = Builder::new("invert-germ");
            b.field("det_order", order_str(r.det_order), json!(order_str(r.det_order)));
            b.field("kappa_sigma", r.kappa_sigma, json!(r.kappa_sigma.to_string())).kappa("kappa_sigma_h", r.kappa_sigma_h);
            b.residual(&r.residual).series("u", &r.u);
            Ok(b.done())
        }
        Command::Drinfeld { f, gamma0, q, xbar, ybar, r, xi } => {
            let n = order_of(g)?;
            let nil = g.ring.as_deref().ok_or_else(|| Error::Parse("drinfeld needs --ring Q[e]/e^N".into())).and_then(io::parse_ring)?;
            let fs = parse_polys(&[f.as_str()])?;
            let rs = drinfeld::ring_space(nil);
            let tn = vec!["t".to_string()];
            let data = drinfeld::DrinfeldData {
                f: fs[0].clone(),
                gamma0: read_univariate(gamma0, "t", &drinfeld::ring_space(1))?,
                nil,
                q: poly_in(q, &tn, &rs)?,
                xbar: read_univariate(xbar, "t", &rs)?,
                ybar: read_univariate(ybar, "t", &rs)?.into_iter().next().ok_or_else(|| Error::Parse("empty y_bar file".into()))?,
                r: *r,
            };
            let xi = match xi {
                Some(p) => read_univariate(p, "t", &rs)?,
                None => vec![Series::zero(&rs, Val::Exact); data.xbar.len()],
            };
            let def = drinfeld::drinfeld_deform(&data, &xi, n)?;
            let mut b = Builder::new("drinfeld");
            b.field("ring", io::ring_name(nil), json!(io::ring_name(nil)));
            b.field("d", def.d, json!(def.d)).field("mode", format!("{:?}", def.mode), json!(format!("{:?}", def.mode)));
            b.kappa("kappa_sigma_h", def.kappa_sigma_h);
            b.field("reduces_to_gamma0", def.reduces_to_gamma0, json!(def.reduces_to_gamma0));
            b.residual(std::slice::from_ref(&def.residual)).series("gamma", &def.gamma);
            Ok(b.done())
        }
        Command::Canonical { matrix, window } => {
            let l = RowFiniteMatrix::parse(&read(matrix)?, nil_of(g)?)?;
            let cf = nmatrix::canonical_form(&l, *window, g.work_bound)?;
            let mut b = Builder::new("canonical");
            let piv: Vec<(usize, usize)> = cf.pivots.iter().copied().filter(|p| p.0 <= *window).collect();
            b.field("rows", cf.rows, json!(cf.rows)).field("kappa", l.kappa(*window), json!(l.kappa(*window)));
            let shown: Vec<String> = piv.iter().map(|(i, j)| format!("{i}->{j}")).collect();
            b.field("pivots", shown.join(" "), json!(piv));
            Ok(b.done())
        }
        Command::Verify { suite } => {
            let rep = verify::run(suite, g.seed)?;
            let mut text = format!("suite {} seed {}\n", rep.suite, rep.seed);
            for c in &rep.checks {
                let _ = writeln!(text, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let pass = rep.pass();
            let _ = writeln!(text, "{}", if pass { "all checks passed" } else { "FAILED" });
            let mut json = serde_json::to_value(&rep).expect("report json");
            json["status"] = json!(if pass { "ok" } else { "failed" });
            Ok(Output { text, json, exit: if pass { 0 } else { 1 } })
        }
    }
}
