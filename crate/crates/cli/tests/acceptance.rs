//! One line per acceptance criterion. Runs without the test harness so the
//! lines are printed on success too.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{decomposition_failures, naive_soundness, Naive};
use wfnet::compose::{as_compose, equal_up_to_sync_order, ComposeOptions};
use wfnet::corpus::{abstraction, random_gwf, random_pair, random_triple, refinement_scenario, PairOptions};
use wfnet::format::{parse_document, parse_morphism, parse_net};
use wfnet::iso::is_isomorphic;
use wfnet::morphism::{check_alpha, check_local_condition, check_well_marked, MorphismClause};
use wfnet::reach::{explore, ExploreOptions};
use wfnet::refine::{certify, intermediate_refinement, refine_both, Premise, RefinementScenario, Side};
use wfnet::workflow::{check_soundness, Witness};

const SKIP_BUDGET: Duration = Duration::from_secs(1);
const PATHOLOGY_BUDGET: Duration = Duration::from_secs(1);
const DECOMPOSE_BUDGET: Duration = Duration::from_secs(60);
const DECOMPOSE_PAIRS: usize = 200;
const DECOMPOSE_MAX_PLACES: usize = 12;
const COMMUTATIVITY_PAIRS: usize = 200;
const ASSOCIATIVITY_TRIPLES: usize = 100;
const ABSTRACTION_SCENARIOS: usize = 100;
const ABSTRACTION_MAX_DRAWS: usize = 5_000;
const CERTIFIED_SCENARIOS: usize = 100;
const CERTIFIED_MAX_DRAWS: usize = 5_000;
const ORACLE_NETS: usize = 500;
const ORACLE_MAX_NODES: usize = 12;
const SEED: u64 = 0x5eed;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

fn text(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap()
}

fn wfnet(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wfnet")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn opts() -> ExploreOptions {
    ExploreOptions::default()
}

fn scenario(manifest: &str) -> RefinementScenario {
    let m: wfnet::format::ScenarioManifest = toml::from_str(&text(manifest)).unwrap();
    let net = |p: &str| parse_net(&text(p)).unwrap();
    let map = |p: &str| parse_morphism(&text(p)).unwrap().map;
    RefinementScenario {
        r1: net(&m.r1),
        r2: net(&m.r2),
        n1: net(&m.n1),
        n2: net(&m.n2),
        phi1: map(&m.phi1),
        phi2: map(&m.phi2),
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let tmp = std::env::temp_dir().join(format!("wfnet-acc-skip-{}.wfnet", std::process::id()));
    let (code, _) = wfnet(&[
        "compose",
        fixture("skip_n1.wfnet").to_str().unwrap(),
        fixture("skip_n2.wfnet").to_str().unwrap(),
        "-o",
        tmp.to_str().unwrap(),
    ]);
    let (sound_code, sound_out) = wfnet(&["check", "sound", tmp.to_str().unwrap()]);
    let (smd_code, _) = wfnet(&["check", "smd", tmp.to_str().unwrap()]);
    let elapsed = start.elapsed();
    let _ = fs::remove_file(&tmp);
    let witness = sound_out.lines().any(|l| l == "marking {f1:1,i2:1}");
    outcome(
        code == 0 && sound_code == 1 && witness && smd_code == 1 && elapsed < SKIP_BUDGET,
        format!("check sound exit {sound_code}, witness {{f1,i2}} {witness}, check smd exit {smd_code}, {elapsed:.2?}"),
    )
}

fn criterion2() -> Outcome {
    let load = |n: &str| parse_net(&text(n)).unwrap();
    let start = Instant::now();
    let c = as_compose(&load("deadlock_n1.wfnet"), &load("deadlock_n2.wfnet"), ComposeOptions::default()).unwrap();
    let r = check_soundness(c.result.gwf(), opts()).unwrap();
    let dead = match r.witness() {
        Some(Witness::Run { sequence, marking }) => {
            marking != c.result.final_marking()
                && c.result.net().enabled_transitions(marking).is_empty()
                && c.result.net().replay(c.result.net().initial(), sequence).as_ref() == Ok(marking)
        }
        _ => false,
    };
    let t1 = start.elapsed();
    let start = Instant::now();
    let c = as_compose(&load("producer_n1.wfnet"), &load("producer_n2.wfnet"), ComposeOptions::default()).unwrap();
    let g = explore(c.result.net(), opts());
    let pumped = g
        .unbounded_witness()
        .is_some_and(|w| c.result.k().contains_key("c") && w.larger.get("c") > w.smaller.get("c"));
    let t2 = start.elapsed();
    outcome(
        dead && !r.is_sound() && pumped && t1 < PATHOLOGY_BUDGET && t2 < PATHOLOGY_BUDGET,
        format!("deadlock witness {dead} ({t1:.2?}), unbounded witness on c {pumped} ({t2:.2?})"),
    )
}

fn criterion3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let start = Instant::now();
    let mut failures = 0;
    let mut markings = 0;
    let mut oversized = 0;
    for i in 0..DECOMPOSE_PAIRS {
        let o = PairOptions {
            optional_send: i % 2 == 1,
            max_places: DECOMPOSE_MAX_PLACES,
        };
        let (a, b) = random_pair(&mut rng, o);
        if a.net().places().len() > DECOMPOSE_MAX_PLACES || b.net().places().len() > DECOMPOSE_MAX_PLACES {
            oversized += 1;
        }
        let c = as_compose(&a, &b, ComposeOptions::default()).unwrap();
        markings += explore(c.result.net(), opts()).vertex_count();
        if !decomposition_failures(&a, &b, &c, opts()).is_empty() {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && oversized == 0 && elapsed < DECOMPOSE_BUDGET,
        format!("{DECOMPOSE_PAIRS} pairs, {markings} markings, {failures} failures, {oversized} oversized, {elapsed:.2?}"),
    )
}

fn criterion4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let o = ComposeOptions::default();
    let mut comm = 0;
    for _ in 0..COMMUTATIVITY_PAIRS {
        let (a, b) = random_pair(&mut rng, PairOptions::default());
        let ab = as_compose(&a, &b, o).unwrap().result;
        let ba = as_compose(&b, &a, o).unwrap().result;
        if !(equal_up_to_sync_order(&ab, &ba).unwrap() && is_isomorphic(&ab, &ba)) {
            comm += 1;
        }
    }
    let mut assoc = 0;
    for _ in 0..ASSOCIATIVITY_TRIPLES {
        let [a, b, e] = random_triple(&mut rng, false);
        let l = as_compose(&as_compose(&a, &b, o).unwrap().result, &e, o).unwrap().result;
        let r = as_compose(&a, &as_compose(&b, &e, o).unwrap().result, o).unwrap().result;
        if !(equal_up_to_sync_order(&l, &r).unwrap() && is_isomorphic(&l, &r)) {
            assoc += 1;
        }
    }
    outcome(
        comm == 0 && assoc == 0,
        format!(
            "commutativity {comm}/{COMMUTATIVITY_PAIRS} failures, associativity {assoc}/{ASSOCIATIVITY_TRIPLES} failures"
        ),
    )
}

fn criterion5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 2);
    let (mut kept, mut draws, mut sound) = (0, 0, 0);
    while kept < ABSTRACTION_SCENARIOS && draws < ABSTRACTION_MAX_DRAWS {
        draws += 1;
        let ab = abstraction(&mut rng);
        let m = wfnet::morphism::Morphism::new(ab.refined.net(), ab.abstracted.net(), ab.map.clone()).unwrap();
        if !check_alpha(&m).valid || !check_soundness(&ab.refined, opts()).unwrap().is_sound() {
            continue;
        }
        kept += 1;
        if check_soundness(&ab.abstracted, opts()).is_ok_and(|r| r.is_sound()) {
            sound += 1;
        }
    }
    outcome(
        kept == ABSTRACTION_SCENARIOS && sound == kept,
        format!("abstraction sound in {sound}/{kept} scenarios ({draws} draws)"),
    )
}

fn criterion6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 3);
    let (mut certified, mut draws, mut agree, mut refined) = (0, 0, 0, 0);
    while certified < CERTIFIED_SCENARIOS && draws < CERTIFIED_MAX_DRAWS {
        draws += 1;
        let s = refinement_scenario(&mut rng);
        let c = certify(&s, opts(), true);
        if !c.is_certified() {
            continue;
        }
        certified += 1;
        refined += usize::from(c.local_condition_reports.values().any(|l| !l.places.is_empty()));
        if c.audit.as_ref().is_some_and(|a| a.is_sound()) {
            agree += 1;
        }
    }
    let c = certify(&scenario("skip_scenario.toml"), opts(), false);
    let planted_interface = !c.is_certified() && c.failed_premises().contains(&Premise::InterfaceSound);
    let c = certify(&scenario("local_scenario.toml"), opts(), false);
    let planted_local = !c.is_certified() && c.failed_premises().contains(&Premise::LocalCondition(Side::Left));
    outcome(
        certified == CERTIFIED_SCENARIOS && agree == certified && planted_interface && planted_local,
        format!(
            "audit agrees in {agree}/{certified} certified ({draws} draws, {refined} with a properly refined place); planted interface refused {planted_interface}, planted local condition refused {planted_local}"
        ),
    )
}

fn criterion7() -> Outcome {
    let load = |n: &str| parse_document(&text(n)).unwrap().to_petri().unwrap().0;
    let abs = load("dead_branch_abstract.wfnet");
    let bad = load("dead_branch_refined.wfnet");
    let good = load("dead_branch_sound.wfnet");
    let m = parse_morphism(&text("dead_branch.morph")).unwrap().bind(&bad, &abs).unwrap();
    let l = check_local_condition(&m).unwrap();
    let localized = l.places.iter().any(|p| {
        p.report
            .failures
            .iter()
            .any(|f| f.clause == MorphismClause::Surjective && f.nodes == ["y"])
    });
    let m = parse_morphism(&text("dead_branch_sound.morph")).unwrap().bind(&good, &abs).unwrap();
    let fixed = check_alpha(&m).valid && check_well_marked(&m).unwrap() && check_local_condition(&m).unwrap().holds;
    let g = parse_net(&text("dead_branch_sound.wfnet")).unwrap();
    let sound = check_soundness(g.gwf(), opts()).unwrap().is_sound();
    outcome(
        !l.holds && localized && fixed && sound,
        format!("fails at y {}, corrected variant passes {}", !l.holds && localized, fixed && sound),
    )
}

fn criterion8() -> Outcome {
    let s = scenario("pair_scenario.toml");
    let valid = [Side::Left, Side::Right]
        .iter()
        .all(|&side| intermediate_refinement(&s, side).is_ok_and(|i| i.is_valid()));
    match refine_both(&s) {
        Ok(n) => {
            let direct = s.system().unwrap();
            let iso = wfnet::iso::isomorphism(&n.net, &direct.result).is_some();
            outcome(
                valid && iso && n.iso.len() == direct.result.net().node_count(),
                format!("{} nodes, commutes pointwise, isomorphic {iso}", n.net.net().node_count()),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion9() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 4);
    let (mut disagree, mut unsound) = (0, 0);
    for _ in 0..ORACLE_NETS {
        let g = random_gwf(&mut rng, ORACLE_MAX_NODES);
        assert!(g.net().node_count() <= ORACLE_MAX_NODES);
        let naive = naive_soundness(g.net(), g.final_marking()) == Naive::Sound;
        unsound += usize::from(!naive);
        match check_soundness(&g, opts()) {
            Ok(r) if r.is_sound() == naive => {}
            _ => disagree += 1,
        }
    }
    outcome(
        disagree == 0,
        format!("{disagree} disagreements on {ORACLE_NETS} nets ({unsound} unsound)"),
    )
}

fn criterion10() -> Outcome {
    let (mut total, mut same) = (0, 0);
    for entry in fs::read_dir(fixtures()).unwrap() {
        let path = entry.unwrap().path();
        let t = fs::read_to_string(&path).unwrap();
        let back = match path.extension().and_then(|e| e.to_str()) {
            Some("wfnet") => parse_document(&t).map(|d| d.serialize()).ok(),
            Some("morph") => parse_morphism(&t).map(|d| d.serialize()).ok(),
            _ => continue,
        };
        total += 1;
        same += usize::from(back.as_deref() == Some(t.as_str()));
    }
    outcome(total > 0 && same == total, format!("{same}/{total} fixtures byte-identical"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("optional send composes into an unsound net", criterion1),
        ("deadlock and unbounded channel", criterion2),
        ("composition markings decompose", criterion3),
        ("commutativity and associativity", criterion4),
        ("abstraction preserves soundness", criterion5),
        ("certified refinements are sound", criterion6),
        ("local condition negative case", criterion7),
        ("refinements commute with composition", criterion8),
        ("soundness agrees with enumeration", criterion9),
        ("fixture round-trip", criterion10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {}: {} ({}; {:.2?})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail,
            start.elapsed()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
