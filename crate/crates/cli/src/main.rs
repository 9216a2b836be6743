use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fanlab_core::catalog;
use fanlab_core::classify::{classify_pipeline, ProductDecomposition, ProjectiveProduct};
use fanlab_core::divisors::{CurveClass, Geometry, Violating};
use fanlab_core::document::{rational_json, to_canonical_string, FanDocument};
use fanlab_core::fan::ColoredFan;
use fanlab_core::horo::HorosphericalEmbedding;
use fanlab_core::mori::{contract, exceptional_dimension, extremal_rays};
use fanlab_core::toric::ToricFan;
use fanlab_core::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "fanlab",
    version,
    about = "Exact computations on toric and horospherical colored fans"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Input {
    /// Fan document (JSON)
    #[arg(long, conflicts_with = "catalog")]
    input: Option<PathBuf>,
    /// Catalog entry such as `p2`, `hirzebruch:2`, `incidence:4,2` or `p1*p2`
    #[arg(long)]
    catalog: Option<String>,
}

#[derive(Subcommand)]
enum Verb {
    /// Check the colored fan and datum axioms
    Validate(Input),
    /// Dimension, rank, Picard number, factoriality, completeness
    Invariants(Input),
    /// Class group; with --divisor, its piecewise linear function
    Divisors {
        #[command(flatten)]
        input: Input,
        /// B-divisor such as `2*r0 + a2`
        #[arg(long, allow_hyphen_values = true)]
        divisor: Option<String>,
    },
    /// Divisor against curves, or toric intersection numbers
    Intersect {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_hyphen_values = true)]
        divisor: Option<String>,
        /// Index into the list of B-stable curves
        #[arg(long)]
        curve: Option<usize>,
        /// Toric: ray indices of the divisors to intersect, comma separated
        #[arg(long)]
        rays: Option<String>,
        /// Toric: cone whose orbit closure starts the product
        #[arg(long)]
        start: Option<String>,
    },
    /// Nef¹ against Psef¹, or Nef^k against Psef^k with --k
    Cones {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Extremal rays of the Mori cone; with --ray, the contraction
    Mori {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        ray: Option<usize>,
    },
    /// The Nef¹ = Psef¹ classification pipeline
    Classify(Input),
    /// Built-in examples
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Show { name: String },
}

struct Report {
    json: Value,
    text: Vec<String>,
    negative: bool,
}

impl Report {
    fn new(json: Value, text: Vec<String>) -> Self {
        Report {
            json,
            text,
            negative: false,
        }
    }
}

enum Failure {
    Usage(String),
    Negative(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownName(_) | Error::BadParams(_) => Failure::Usage(e.to_string()),
            _ => Failure::Negative(e.to_string()),
        }
    }
}

type Outcome = Result<Report, Failure>;

fn q(x: &BigRational) -> Value {
    rational_json(x)
}

fn ints(v: &[BigInt]) -> Value {
    Value::Array(
        v.iter()
            .map(|x| {
                x.to_i64()
                    .map(Value::from)
                    .unwrap_or_else(|| Value::String(x.to_string()))
            })
            .collect(),
    )
}

fn vec_text(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn rat_text(v: &[BigRational]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn index_list(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse()
                .map_err(|_| Failure::Usage(format!("bad index {x:?}")))
        })
        .collect()
}

fn load(input: &Input) -> Result<FanDocument, Failure> {
    match (&input.input, &input.catalog) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(FanDocument::parse(&text)?)
        }
        (None, Some(spec)) => Ok(catalog::catalog_spec(spec)?),
        (None, None) => Err(Failure::Usage(
            "one of --input or --catalog is required".into(),
        )),
    }
}

fn embedding(input: &Input) -> Result<HorosphericalEmbedding, Failure> {
    let e = load(input)?.embedding()?;
    e.require_valid()?;
    Ok(e)
}

fn curve_json(g: &Geometry, c: &CurveClass) -> Value {
    json!({"curve": c.to_string(), "description": g.describe_curve(c)})
}

fn certificate_json(g: &Geometry, v: &Violating) -> Value {
    json!({
        "divisor": v.divisor.to_string(),
        "curve": curve_json(g, &v.curve),
        "value": q(&v.value),
    })
}

fn fan_json(f: &ColoredFan) -> Value {
    serde_json::from_str(&FanDocument::from_toric(f.clone()).to_json()).expect("document json")
}

fn validate(input: &Input) -> Outcome {
    let doc = load(input)?;
    let report = doc.validate();
    let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    let mut text = vec![if report.is_valid() {
        "valid".to_string()
    } else {
        "invalid".to_string()
    }];
    text.extend(msgs.iter().map(|m| format!("  {m}")));
    let mut r = Report::new(
        json!({"valid": report.is_valid(), "violations": msgs}),
        text,
    );
    r.negative = !report.is_valid();
    Ok(r)
}

fn invariants(input: &Input) -> Outcome {
    let e = embedding(input)?;
    let fan = &e.fan;
    let support = fan.support_and_walls()?;
    let fact = fan.factoriality_profile()?;
    let smooth = e.smoothness_profile()?;
    let dim = e.dimension()?;
    let picard = e.picard_number();
    let mut text = vec![
        format!("dimension: {dim}"),
        format!("rank: {}", fan.lattice_rank),
        format!("rays: {}", fan.rays.len()),
        format!("maximal cones: {}", fan.maximal_cones.len()),
        format!("complete: {}", support.complete),
        format!("Q-factorial: {}", fact.q_factorial),
        format!("locally factorial: {}", fact.locally_factorial),
        format!("toric fan smooth: {}", smooth.toric_fan_smooth),
    ];
    text.push(match &picard {
        Ok(p) => format!("picard number: {p}"),
        Err(err) => format!("picard number: unavailable ({err})"),
    });
    let json = json!({
        "dimension": dim,
        "rank": fan.lattice_rank,
        "rays": fan.rays.len(),
        "maximal_cones": fan.maximal_cones.len(),
        "complete": support.complete,
        "q_factorial": fact.q_factorial,
        "locally_factorial": fact.locally_factorial,
        "toric_fan_smooth": smooth.toric_fan_smooth,
        "toric": e.is_toric(),
        "picard_number": picard.as_ref().ok(),
        "picard_error": picard.as_ref().err().map(|x| x.to_string()),
    });
    Ok(Report::new(json, text))
}

fn divisors(input: &Input, divisor: Option<&str>) -> Outcome {
    let e = embedding(input)?;
    let g = Geometry::new(&e)?;
    let cg = g.class_group();
    let names: Vec<String> = g.divisors.iter().map(|d| d.to_string()).collect();
    let basis: Vec<String> = g.pic_basis().iter().map(|&i| names[i].clone()).collect();
    let torsion: Vec<String> = cg.torsion.iter().map(|t| t.to_string()).collect();
    let mut text = vec![
        format!("B-stable divisors: {}", names.join(", ")),
        format!(
            "class group: Z^{}{}",
            cg.free_rank,
            torsion
                .iter()
                .map(|t| format!(" + Z/{t}"))
                .collect::<String>()
        ),
        format!("Pic_Q basis: {}", basis.join(", ")),
    ];
    let mut json = json!({
        "divisors": names,
        "class_group": {"free_rank": cg.free_rank, "torsion": torsion},
        "pic_basis": basis,
    });
    if let Some(expr) = divisor {
        let delta = g.parse_bdivisor(expr)?;
        text.push(format!("divisor: {delta}"));
        match g.pl_function(&delta) {
            Ok(pl) => {
                for (i, chi) in pl.pl.chi.iter().enumerate() {
                    text.push(format!("  cone {i}: chi = {}", rat_text(chi)));
                }
                text.push(format!("Cartier: {}", pl.cartier));
                text.push(format!("Q-Cartier: {}", pl.q_cartier));
                json["pl"] = json!({
                    "chi": pl.pl.chi.iter().map(|c| c.iter().map(q).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "cartier": pl.cartier,
                    "q_cartier": pl.q_cartier,
                });
            }
            Err(Error::Inconsistent(y)) => {
                text.push(format!("Q-Cartier: false (no linear function on cone {y})"));
                json["pl"] = json!({"cartier": false, "q_cartier": false, "inconsistent_cone": y});
            }
            Err(err) => return Err(err.into()),
        }
    }
    Ok(Report::new(json, text))
}

fn intersect(
    input: &Input,
    divisor: Option<&str>,
    curve: Option<usize>,
    rays: Option<&str>,
    start: Option<&str>,
) -> Outcome {
    let e = embedding(input)?;
    if let Some(rays) = rays {
        if !e.is_toric() {
            return Err(Failure::Usage("--rays needs a toric fan".into()));
        }
        let t = ToricFan::new(&e.fan)?;
        let divs = index_list(rays)?;
        let start = index_list(start.unwrap_or(""))?;
        let v = t.intersection_number(&divs, &start)?;
        let text = vec![format!("intersection number: {v}")];
        return Ok(Report::new(
            json!({"rays": divs, "start": start, "value": q(&v)}),
            text,
        ));
    }
    let expr =
        divisor.ok_or_else(|| Failure::Usage("intersect needs --divisor or --rays".into()))?;
    let g = Geometry::new(&e)?;
    let delta = g.parse_bdivisor(expr)?;
    let curves = g.curves();
    let chosen: Vec<usize> = match curve {
        Some(i) if i < curves.len() => vec![i],
        Some(i) => {
            return Err(Failure::Usage(format!(
                "no curve {i}; there are {}",
                curves.len()
            )))
        }
        None => (0..curves.len()).collect(),
    };
    let mut text = Vec::new();
    let mut rows = Vec::new();
    for i in chosen {
        let v = g.intersect_curve(&delta, &curves[i])?;
        text.push(format!(
            "[{i}] {} · {}: {v}",
            delta,
            g.describe_curve(&curves[i])
        ));
        let mut c = curve_json(&g, &curves[i]);
        c["index"] = json!(i);
        c["value"] = q(&v);
        rows.push(c);
    }
    Ok(Report::new(
        json!({"divisor": delta.to_string(), "intersections": rows}),
        text,
    ))
}

fn cones(input: &Input, k: Option<usize>) -> Outcome {
    let e = embedding(input)?;
    if let Some(k) = k {
        if !e.is_toric() {
            return Err(Failure::Usage("--k needs a toric fan".into()));
        }
        let t = ToricFan::new(&e.fan)?;
        if k == 0 || k >= t.dim() {
            return Err(Failure::Usage(format!(
                "--k must lie in 1..{}",
                t.dim().saturating_sub(1)
            )));
        }
        let res = t.nefk_eq_psefk(k)?;
        let mut text = vec![format!("Nef^{k} = Psef^{k}: {}", res.equal)];
        let cert = res.certificate.as_ref().map(|(tau, sigma, v)| {
            text.push(format!("  V({tau:?}) · V({sigma:?}) = {v}"));
            json!({"tau": tau, "sigma": sigma, "value": q(v)})
        });
        let mut r = Report::new(
            json!({"k": k, "equal": res.equal, "certificate": cert}),
            text,
        );
        r.negative = !res.equal;
        return Ok(r);
    }
    let g = Geometry::new(&e)?;
    let res = g.nef1_eq_psef1()?;
    let psef = g.psef_cone()?;
    let nef = g.nef_cone()?;
    let mut text = vec![
        format!("Nef^1 = Psef^1: {}", res.equal),
        format!(
            "Psef^1 rays: {}",
            psef.rays()
                .iter()
                .map(|r| vec_text(r))
                .collect::<Vec<_>>()
                .join(" ")
        ),
        format!(
            "Nef^1 rays: {}",
            nef.rays()
                .iter()
                .map(|r| vec_text(r))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    ];
    if let Some(c) = &res.certificate {
        text.push(format!(
            "certificate: {} · {} = {}",
            c.divisor,
            g.describe_curve(&c.curve),
            c.value
        ));
    }
    let json = json!({
        "equal": res.equal,
        "certificate": res.certificate.as_ref().map(|c| certificate_json(&g, c)),
        "pic_basis": g.pic_basis().iter().map(|&i| g.divisors[i].to_string()).collect::<Vec<_>>(),
        "psef_rays": psef.rays().iter().map(|r| ints(r)).collect::<Vec<_>>(),
        "nef_rays": nef.rays().iter().map(|r| ints(r)).collect::<Vec<_>>(),
    });
    let mut r = Report::new(json, text);
    r.negative = !res.equal;
    Ok(r)
}

fn mori(input: &Input, ray: Option<usize>) -> Outcome {
    let e = embedding(input)?;
    let g = Geometry::new(&e)?;
    let rays = extremal_rays(&g)?;
    let Some(idx) = ray else {
        let mut text = Vec::new();
        let mut rows = Vec::new();
        for (i, r) in rays.iter().enumerate() {
            let names: Vec<String> = r.curves.iter().map(|c| g.describe_curve(c)).collect();
            text.push(format!(
                "[{i}] {}: {}",
                vec_text(&r.generator),
                names.join("; ")
            ));
            rows.push(json!({
                "index": i,
                "generator": ints(&r.generator),
                "curves": r.curves.iter().map(|c| curve_json(&g, c)).collect::<Vec<_>>(),
            }));
        }
        return Ok(Report::new(json!({"extremal_rays": rows}), text));
    };
    let res = contract(&g, idx)?;
    let dim = exceptional_dimension(&g, &res)?;
    let kind = format!("{:?}", res.kind).to_lowercase();
    let mut text = vec![format!("contraction of ray {idx}: {kind}")];
    if let Some(c) = &res.exceptional_cone {
        text.push(format!("exceptional cone: {c:?}"));
    }
    if let Some(d) = dim {
        text.push(format!("exceptional locus dimension: {d}"));
    }
    if let Some(n) = &res.note {
        text.push(format!("note: {n}"));
    }
    let target = res.target.as_ref().map(|t| {
        let doc = FanDocument::from_embedding(t);
        text.push("target:".into());
        text.extend(doc.to_json().lines().map(|l| format!("  {l}")));
        serde_json::from_str::<Value>(&doc.to_json()).expect("document json")
    });
    let quotient = res.quotient.as_ref().map(|qt| {
        text.push(format!("quotient fan in rank {}", qt.fan.lattice_rank));
        json!({
            "kernel": qt.kernel.iter().map(|v| ints(v)).collect::<Vec<_>>(),
            "projection": qt.projection.iter().map(|v| ints(v)).collect::<Vec<_>>(),
            "fan": fan_json(&qt.fan),
            "dominant_colors": qt.dominant.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "valid": qt.report.is_valid(),
        })
    });
    let json = json!({
        "ray": idx,
        "kind": kind,
        "exceptional_cone": res.exceptional_cone,
        "exceptional_dimension": dim,
        "image_cone": res.image_cone.as_ref().map(|(gens, cols)| json!({
            "generators": gens.iter().map(|v| ints(v)).collect::<Vec<_>>(),
            "colors": cols.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })),
        "target": target,
        "quotient": quotient,
        "note": res.note,
    });
    Ok(Report::new(json, text))
}

fn product_json(p: &Option<ProjectiveProduct>) -> Value {
    match p {
        None => Value::Null,
        Some(p) => json!({
            "partition": p.partition,
            "groups": p.groups,
            "coefficients": p.coefficients.iter().map(|c| ints(c)).collect::<Vec<_>>(),
            "exact": p.exact,
            "cover": p.cover,
        }),
    }
}

fn decomposition_json(d: &ProductDecomposition) -> Value {
    json!({
        "groups": d.groups,
        "sublattices": d.sublattices.iter().map(|b| b.iter().map(|v| ints(v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "colors": d.colors.iter().map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "factors": d.factors.iter().map(|f| serde_json::from_str::<Value>(&FanDocument::from_embedding(f).to_json()).expect("document json")).collect::<Vec<_>>(),
        "budget_exhausted": d.budget_exhausted,
    })
}

fn classify(input: &Input) -> Outcome {
    let e = embedding(input)?;
    let g = Geometry::new(&e)?;
    let r = classify_pipeline(&e)?;
    let d0: Vec<String> = r.d0.iter().map(|c| c.to_string()).collect();
    let mut text = vec![
        format!("picard number: {}", r.picard_number),
        format!("Nef^1 = Psef^1: {}", r.nef1.equal),
    ];
    if let Some(c) = &r.nef1.certificate {
        text.push(format!(
            "certificate: {} · {} = {}",
            c.divisor,
            g.describe_curve(&c.curve),
            c.value
        ));
    }
    text.push(format!("D0: {{{}}}", d0.join(", ")));
    if let Some(ok) = r.unattached_is_d0 {
        text.push(format!("unattached colors = D0: {ok}"));
    }
    if let Some(red) = &r.reduction {
        let target: Vec<&str> = red.target_parabolic.iter().map(String::as_str).collect();
        text.push(format!(
            "target G/P with P = P({{{}}}), dimension {}",
            target.join(", "),
            red.target_dimension
        ));
        text.push(format!("fiber diagram: {}", red.fiber.datum.diagram));
    }
    if let Some(d) = &r.fiber_decomposition {
        text.push(format!("fiber factors: {}", d.factors.len()));
    }
    if let Some(p) = &r.factor_picard_numbers {
        text.push(format!("factor picard numbers: {p:?}"));
    }
    text.push(format!("toroidal: {}", r.toroidal));
    if r.rational_homogeneous {
        text.push("rational homogeneous".into());
    }
    if let Some(p) = &r.toric_product {
        match p {
            Some(p) => text.push(format!(
                "product of projective spaces {:?}{}",
                p.partition,
                if p.cover { " (finite cover)" } else { "" }
            )),
            None => text.push("not a product of projective spaces".into()),
        }
    }
    text.push(format!(
        "smoothness profile: locally factorial {}, toric fan smooth {}",
        r.smoothness.locally_factorial, r.smoothness.toric_fan_smooth
    ));
    let json = json!({
        "picard_number": r.picard_number,
        "nef1_eq_psef1": r.nef1.equal,
        "certificate": r.nef1.certificate.as_ref().map(|c| certificate_json(&g, c)),
        "d0": d0,
        "unattached_is_d0": r.unattached_is_d0,
        "reduction": r.reduction.as_ref().map(|red| json!({
            "d1": red.d1.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "target_parabolic": red.target_parabolic,
            "target_dimension": red.target_dimension,
            "node_map": red.node_map,
            "pairings_vanish_on_d1": red.pairings_vanish_on_d1,
            "pairings_vanish_on_i": red.pairings_vanish_on_i,
            "fiber": serde_json::from_str::<Value>(&FanDocument::from_embedding(&red.fiber).to_json()).expect("document json"),
        })),
        "fiber_decomposition": r.fiber_decomposition.as_ref().map(decomposition_json),
        "factor_picard_numbers": r.factor_picard_numbers,
        "picard_accounted": r.picard_accounted,
        "toroidal": r.toroidal,
        "rational_homogeneous": r.rational_homogeneous,
        "toric_product": r.toric_product.as_ref().map(product_json),
        "smoothness": {
            "locally_factorial": r.smoothness.locally_factorial,
            "toric_fan_smooth": r.smoothness.toric_fan_smooth,
        },
    });
    let mut rep = Report::new(json, text);
    rep.negative = !r.nef1.equal;
    Ok(rep)
}

fn catalog_verb(action: &CatalogAction) -> Outcome {
    match action {
        CatalogAction::List => {
            let names = catalog::list();
            Ok(Report::new(json!({"entries": names}), names.clone()))
        }
        CatalogAction::Show { name } => {
            let doc = catalog::catalog_spec(name)?;
            let text = doc.to_json();
            let json: Value = serde_json::from_str(&text).expect("document json");
            Ok(Report::new(json, vec![text.trim_end().to_string()]))
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.verb {
        Verb::Validate(i) => validate(i),
        Verb::Invariants(i) => invariants(i),
        Verb::Divisors { input, divisor } => divisors(input, divisor.as_deref()),
        Verb::Intersect {
            input,
            divisor,
            curve,
            rays,
            start,
        } => intersect(
            input,
            divisor.as_deref(),
            *curve,
            rays.as_deref(),
            start.as_deref(),
        ),
        Verb::Cones { input, k } => cones(input, *k),
        Verb::Mori { input, ray } => mori(input, *ray),
        Verb::Classify(i) => classify(i),
        Verb::Catalog { action } => catalog_verb(action),
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("FANLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring FANLAB_THREADS={v:?}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    let outcome = std::panic::catch_unwind(|| run(&cli));
    match outcome {
        Ok(Ok(report)) => {
            match cli.format {
                Format::Json => {
                    let mut v = report.json;
                    v["status"] = json!(if report.negative { "negative" } else { "ok" });
                    print!("{}", to_canonical_string(&v));
                }
                Format::Text => {
                    for line in &report.text {
                        println!("{line}");
                    }
                }
            }
            ExitCode::from(if report.negative { 1 } else { 0 })
        }
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Negative(msg))) => {
            eprintln!("error: {msg}");
            if cli.format == Format::Json {
                print!(
                    "{}",
                    to_canonical_string(&json!({"status": "error", "error": msg}))
                );
            }
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("internal error");
            ExitCode::from(3)
        }
    }
}
