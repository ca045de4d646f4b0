use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wfnet::compose::{as_compose, p_simplify, ComposeOptions};
use wfnet::format::{parse_document, parse_morphism, serialize_net, FormatError, MorphismDocument, NetDocument, ScenarioManifest};
use wfnet::labeled::LgwfNet;
use wfnet::morphism::{check_alpha, check_alpha_hat, check_local_condition, well_marked_failures, Morphism};
use wfnet::reach::{explore, ExploreOptions, DEFAULT_CAP, DEFAULT_LIMIT};
use wfnet::refine::{certify, compose_refinements, intermediate_refinement, RefineError, RefinementScenario, Side};
use wfnet::unfolding::unfold;
use wfnet::workflow::{check_soundness, find_sequential_cover, sequential_component_through};
use wfnet::{Marking, PetriNet};

#[derive(Parser)]
#[command(name = "wfnet", version, about = "Verifier for labeled workflow nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a net and check the workflow and labeling rules.
    Validate { net: PathBuf },
    /// Decide soundness, state machine decomposability or safeness.
    Check {
        property: Property,
        net: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Compose two labeled nets.
    Compose {
        left: PathBuf,
        right: PathBuf,
        /// Merge places with equal neighbourhoods.
        #[arg(long)]
        p_simplify: bool,
        /// Rename colliding nodes of the right component.
        #[arg(long)]
        auto_prefix: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a structure map between two nets.
    CheckMorphism {
        map: PathBuf,
        /// Also require final markings and labels to be preserved.
        #[arg(long)]
        alpha_hat: bool,
        /// Check the local condition on every properly refined place.
        #[arg(long)]
        local: bool,
        #[arg(long)]
        well_marked: bool,
    },
    /// Refinement of composed systems.
    Refine {
        #[command(subcommand)]
        command: RefineCommand,
    },
    /// Print a prefix of the unfolding.
    Unfold {
        net: PathBuf,
        /// Event bound for nets with cycles.
        #[arg(long, default_value_t = 1000)]
        depth: usize,
    },
    /// Print the reachability graph.
    Reach {
        net: PathBuf,
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        bounds: Bounds,
    },
}

#[derive(Subcommand)]
enum RefineCommand {
    /// Check the premises under which the refined system is sound.
    Certify {
        manifest: PathBuf,
        /// Also explore the refined system explicitly.
        #[arg(long)]
        audit: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Substitute two component refinements into their composition.
    Compose {
        left: PathBuf,
        right: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Sound,
    Smd,
    Safe,
}

#[derive(Args, Clone, Copy)]
struct Bounds {
    /// Token count treated as unbounded.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u32,
    /// Largest number of markings explored.
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    limit: usize,
}

impl Bounds {
    fn options(self) -> ExploreOptions {
        ExploreOptions {
            cap: self.cap,
            limit: self.limit,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Ok(Verdict::Inconclusive) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn document(path: &Path) -> Result<NetDocument> {
    parse_document(&read(path)?).with_context(|| path.display().to_string())
}

fn lgwf(path: &Path) -> Result<LgwfNet> {
    document(path)?.to_lgwf().with_context(|| path.display().to_string())
}

fn petri(path: &Path) -> Result<(PetriNet, Marking)> {
    document(path)?.to_petri().with_context(|| path.display().to_string())
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn run(command: Command) -> Result<Verdict> {
    match command {
        Command::Validate { net } => validate(&net),
        Command::Check { property, net, bounds } => match property {
            Property::Sound => check_sound(&net, bounds.options()),
            Property::Smd => check_smd(&net),
            Property::Safe => check_safe(&net, bounds.options()),
        },
        Command::Compose {
            left,
            right,
            p_simplify: simplify,
            auto_prefix,
            output,
        } => {
            let (a, b) = (lgwf(&left)?, lgwf(&right)?);
            let c = as_compose(&a, &b, ComposeOptions { auto_prefix })?;
            let c = if simplify { p_simplify(&c)? } else { c };
            emit(&serialize_net(&c.result), output.as_deref())?;
            Ok(Verdict::Pass)
        }
        Command::CheckMorphism {
            map,
            alpha_hat,
            local,
            well_marked,
        } => check_morphism(&map, alpha_hat, local, well_marked),
        Command::Refine { command } => match command {
            RefineCommand::Certify {
                manifest,
                audit,
                json,
                bounds,
            } => {
                let s = load_scenario(&manifest)?;
                let c = certify(&s, bounds.options(), audit);
                if json {
                    println!("{}", serde_json::to_string_pretty(&c)?);
                } else {
                    println!("{c}");
                }
                Ok(c.is_certified().into())
            }
            RefineCommand::Compose { left, right, output } => refine_compose(&left, &right, output.as_deref()),
        },
        Command::Unfold { net, depth } => {
            let (n, _) = petri(&net)?;
            let bp = unfold(&n, depth)?;
            for c in &bp.conditions {
                println!("condition {} {}", c.id, c.place);
            }
            for e in &bp.events {
                let names = |v: &[usize]| v.iter().map(|&i| bp.conditions[i].id.as_str()).collect::<Vec<_>>().join(" ");
                println!("event {} {} pre {} post {}", e.id, e.transition, names(&e.preset), names(&e.postset));
            }
            if bp.partial {
                println!("partial: event bound {depth} reached");
            }
            Ok(Verdict::Pass)
        }
        Command::Reach { net, dot, bounds } => {
            let (n, _) = petri(&net)?;
            let g = explore(&n, bounds.options());
            if dot {
                print!("{}", g.to_dot());
            } else {
                for i in 0..g.vertex_count() {
                    println!("m{} {}", i, g.marking(i));
                }
                for e in g.edges() {
                    println!("m{} -> m{} {}", e.from, e.to, g.transition_name(e.transition));
                }
            }
            if let Some(w) = g.unbounded_witness() {
                eprintln!("unbounded: fire {}\nmarking {}", w.path.join(" "), w.larger);
            }
            Ok(if g.is_complete() { Verdict::Pass } else { Verdict::Inconclusive })
        }
    }
}

fn validate(path: &Path) -> Result<Verdict> {
    let doc = document(path)?;
    match doc.to_lgwf() {
        Ok(n) => {
            println!(
                "valid: {} ({} places, {} transitions)",
                n.name(),
                n.net().places().len(),
                n.net().transitions().len()
            );
            Ok(Verdict::Pass)
        }
        Err(FormatError::Semantic(e)) => {
            println!("invalid: {e}");
            Ok(Verdict::Fail)
        }
        Err(e) => Err(e.into()),
    }
}

fn check_sound(path: &Path, opts: ExploreOptions) -> Result<Verdict> {
    let n = lgwf(path)?;
    match check_soundness(n.gwf(), opts) {
        Ok(r) => {
            println!("{r}");
            Ok(r.is_sound().into())
        }
        Err(e) => {
            println!("inconclusive: {e}");
            Ok(Verdict::Inconclusive)
        }
    }
}

fn check_smd(path: &Path) -> Result<Verdict> {
    let (n, _) = petri(path)?;
    if let Some(cover) = find_sequential_cover(&n) {
        println!("state machine decomposable: {} components", cover.len());
        for c in cover {
            println!("component {}", c.places.iter().cloned().collect::<Vec<_>>().join(" "));
        }
        return Ok(Verdict::Pass);
    }
    let lost: Vec<&str> = n
        .places()
        .iter()
        .filter(|p| sequential_component_through(&n, p, &Default::default()).is_none())
        .map(String::as_str)
        .collect();
    println!("not state machine decomposable");
    println!("uncovered {}", lost.join(" "));
    Ok(Verdict::Fail)
}

fn check_safe(path: &Path, opts: ExploreOptions) -> Result<Verdict> {
    let (n, _) = petri(path)?;
    let g = explore(&n, opts);
    if let Some(i) = (0..g.vertex_count()).find(|&i| g.state(i).iter().any(|&x| x > 1)) {
        println!("not safe\nfire {}\nmarking {}", g.path_to(i).join(" "), g.marking(i));
        return Ok(Verdict::Fail);
    }
    if let Some(w) = g.unbounded_witness() {
        println!("not safe (unbounded)\nfire {}\nmarking {}", w.path.join(" "), w.larger);
        return Ok(Verdict::Fail);
    }
    if !g.is_complete() {
        println!("inconclusive: exploration truncated after {} markings", g.vertex_count());
        return Ok(Verdict::Inconclusive);
    }
    println!("safe ({} reachable markings)", g.vertex_count());
    Ok(Verdict::Pass)
}

/// Nets named in a morphism file are looked up next to it as `<name>.wfnet`.
fn companion(map: &Path, name: &str) -> PathBuf {
    map.parent().unwrap_or(Path::new(".")).join(format!("{name}.wfnet"))
}

fn load_map(path: &Path) -> Result<MorphismDocument> {
    parse_morphism(&read(path)?).with_context(|| path.display().to_string())
}

fn check_morphism(path: &Path, alpha_hat: bool, local: bool, well_marked: bool) -> Result<Verdict> {
    let doc = load_map(path)?;
    let (sp, tp) = (companion(path, &doc.source), companion(path, &doc.target));
    let mut ok = true;
    let report = if alpha_hat {
        check_alpha_hat(&lgwf(&sp)?, &lgwf(&tp)?, doc.map.clone())?
    } else {
        let (s, _) = petri(&sp)?;
        let (t, _) = petri(&tp)?;
        check_alpha(&doc.bind(&s, &t)?)
    };
    println!("{}: {report}", if alpha_hat { "alpha-hat" } else { "alpha" });
    ok &= report.valid;
    if local || well_marked {
        let (s, _) = petri(&sp)?;
        let (t, _) = petri(&tp)?;
        let m = Morphism::new(&s, &t, doc.map.clone())?;
        if well_marked {
            let bad = well_marked_failures(&m)?;
            if bad.is_empty() {
                println!("well-marked");
            } else {
                println!("not well-marked: {}", bad.join(", "));
                ok = false;
            }
        }
        if local {
            if !report.valid {
                bail!("local condition needs a valid morphism");
            }
            let l = check_local_condition(&m)?;
            println!("{l}");
            ok &= l.holds;
        }
    }
    Ok(ok.into())
}

fn load_scenario(path: &Path) -> Result<RefinementScenario> {
    let m: ScenarioManifest = toml::from_str(&read(path)?).with_context(|| path.display().to_string())?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let net = |p: &str| lgwf(&dir.join(p));
    let map = |p: &str| load_map(&dir.join(p)).map(|d| d.map);
    Ok(RefinementScenario {
        r1: net(&m.r1)?,
        r2: net(&m.r2)?,
        n1: net(&m.n1)?,
        n2: net(&m.n2)?,
        phi1: map(&m.phi1)?,
        phi2: map(&m.phi2)?,
    })
}

fn refine_compose(left: &Path, right: &Path, output: Option<&Path>) -> Result<Verdict> {
    let (l, r) = (load_map(left)?, load_map(right)?);
    let s = RefinementScenario {
        r1: lgwf(&companion(left, &l.source))?,
        n1: lgwf(&companion(left, &l.target))?,
        r2: lgwf(&companion(right, &r.source))?,
        n2: lgwf(&companion(right, &r.target))?,
        phi1: l.map,
        phi2: r.map,
    };
    let li = intermediate_refinement(&s, Side::Left)?;
    let ri = intermediate_refinement(&s, Side::Right)?;
    for i in [&li, &ri] {
        if !i.is_valid() {
            println!("{} refinement of the interface is not valid: {}", i.side, i.report);
            for f in &i.arc_failures {
                println!("  {f}");
            }
            return Ok(Verdict::Fail);
        }
    }
    let out = match compose_refinements(&li, &ri) {
        Ok(out) => out,
        Err(e @ (RefineError::NonCommutingDiagram(_) | RefineError::InvalidResult(_))) => {
            println!("{e}");
            return Ok(Verdict::Fail);
        }
        Err(e) => return Err(e.into()),
    };
    let direct = s.system()?;
    let iso = wfnet::iso::isomorphism(&out.net, &direct.result);
    let text = serialize_net(&out.net);
    let summary = format!(
        "diagram commutes on {} nodes; {}",
        out.net.net().node_count(),
        if iso.is_some() {
            "isomorphic to the direct composition"
        } else {
            "NOT isomorphic to the direct composition"
        }
    );
    match output {
        Some(p) => {
            emit(&text, Some(p))?;
            println!("{summary}");
        }
        None => {
            emit(&text, None)?;
            eprintln!("{summary}");
        }
    }
    Ok(iso.is_some().into())
}
