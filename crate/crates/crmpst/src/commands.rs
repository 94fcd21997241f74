use std::collections::{HashSet, VecDeque};
use std::io::Write;
use std::path::Path;

use crash_mpst::calculus::{
    is_conforming_quiescent, run_session, typecheck_session_with, CrashSchedule, Outcome, TypingMode,
};
use crash_mpst::config::{config_transitions, Arrow};
use crash_mpst::global_lts::{global_transitions, AnnotatedGlobal};
use crash_mpst::label::TransitionLabel;
use crash_mpst::model::{Diagnostic, Role};
use crash_mpst::projection::project_all;
use crash_mpst::syntax::{
    parse_process_script, parse_protocol_diagnostics, render_global_brief, render_local, ProcessScript, ProtocolDecl,
};
use crash_mpst::verify::{
    check_correspondence, check_deadlock_freedom, check_liveness, check_safety, derive_canonical_config,
    derive_canonical_config_for, ExplorationBounds, Status, Verdict,
};

use crate::exit;
use crate::report::{CheckReport, Checks, TraceReport, VerifyReport};
use crate::style;
use crate::{RunArgs, SimulateArgs, VerifyArgs};

// Writes to stdout, ignoring errors: a closed pipe (`crmpst … | head`) must not
// turn into a panic or change the exit code.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn read(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        exit::IO
    })
}

fn print_diagnostics(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}:{d}", path.display());
    }
}

/// Parses a protocol file, printing diagnostics.
fn load_protocol(path: &Path) -> Result<ProtocolDecl, u8> {
    let src = read(path)?;
    let (decl, diags) = parse_protocol_diagnostics(&src);
    print_diagnostics(path, &diags);
    decl.ok_or(exit::FAILED)
}

fn load_processes(path: &Path) -> Result<ProcessScript, u8> {
    let src = read(path)?;
    parse_process_script(&src).map_err(|diags| {
        print_diagnostics(path, &diags);
        exit::FAILED
    })
}

fn code(r: Result<u8, u8>) -> u8 {
    r.unwrap_or_else(|c| c)
}

pub fn check(path: &Path) -> u8 {
    code(check_inner(path))
}

fn check_inner(path: &Path) -> Result<u8, u8> {
    let decl = load_protocol(path)?;
    match project_all(&decl.body, &decl.role_names(), &decl.reliable()) {
        Ok(ps) => {
            out!("{} {}", style::bold("protocol"), decl.name);
            for (r, t) in ps {
                out!("  {r}: {}", render_local(&t));
            }
            Ok(exit::OK)
        }
        Err(e) => {
            eprintln!("{}: error[Projection]: {e}", path.display());
            Ok(exit::FAILED)
        }
    }
}

pub fn verify(args: &VerifyArgs) -> u8 {
    code(verify_inner(args))
}

fn verify_inner(args: &VerifyArgs) -> Result<u8, u8> {
    let decl = load_protocol(&args.path)?;
    let reliable = decl.reliable();
    let roles = decl.role_names();
    let projections = project_all(&decl.body, &roles, &reliable).map_err(|e| {
        eprintln!("{}: error[Projection]: {e}", args.path.display());
        exit::FAILED
    })?;
    let ann = AnnotatedGlobal::new(decl.body.clone());
    // Declared roles that never communicate still take part, with type end.
    let domain = roles.iter().cloned().chain(ann.g.mentioned_roles()).collect();
    let c0 = derive_canonical_config_for(&ann, &reliable, &domain).map_err(|e| {
        eprintln!("{}: error: {e}", args.path.display());
        exit::FAILED
    })?;
    let bounds = ExplorationBounds {
        queue_bound: args.bound,
        state_bound: args.state_bound,
        cycle_len_bound: args.cycle_bound,
        threads: args.threads.max(1),
    };
    let verdicts = [
        ("safety", check_safety(&c0, &reliable, &bounds)),
        ("deadlock_freedom", check_deadlock_freedom(&c0, &reliable, &bounds)),
        ("liveness", check_liveness(&c0, &reliable, &bounds)),
        ("correspondence", check_correspondence(&ann, &c0, &reliable, &bounds)),
    ];
    if args.json {
        let rep = VerifyReport {
            protocol: decl.name.clone(),
            reliable: reliable.iter().map(ToString::to_string).collect(),
            projections: projections.iter().map(|(r, t)| (r.to_string(), render_local(t))).collect(),
            checks: Checks {
                safety: CheckReport::from(&verdicts[0].1),
                deadlock_freedom: CheckReport::from(&verdicts[1].1),
                liveness: CheckReport::from(&verdicts[2].1),
                correspondence: CheckReport::from(&verdicts[3].1),
            },
            bounds: (&bounds).into(),
        };
        out!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    } else {
        out!("{} {}", style::bold("protocol"), decl.name);
        let names: Vec<String> = reliable.iter().map(ToString::to_string).collect();
        out!("reliable: {{{}}}", names.join(", "));
        for (name, v) in &verdicts {
            print_verdict(name, v);
        }
    }
    Ok(summary_code(verdicts.iter().map(|(_, v)| v)))
}

fn print_verdict(name: &str, v: &Verdict) {
    out!("{name}: {} ({})", style::status(v.status.as_str()), v.reason);
    if let Some(w) = &v.witness {
        for (i, s) in w.iter().enumerate() {
            out!("  {:>3}  {}", i + 1, s.label);
        }
    }
}

fn summary_code<'a>(vs: impl Iterator<Item = &'a Verdict>) -> u8 {
    let worst = vs.map(|v| v.status).fold(Status::Holds, |acc, s| match (acc, s) {
        (Status::Violated, _) | (_, Status::Violated) => Status::Violated,
        (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
        _ => Status::Holds,
    });
    match worst {
        Status::Holds => exit::OK,
        Status::Violated => exit::FAILED,
        Status::Inconclusive => exit::INCONCLUSIVE,
    }
}

pub fn simulate(args: &SimulateArgs) -> u8 {
    code(simulate_inner(args))
}

fn simulate_inner(args: &SimulateArgs) -> Result<u8, u8> {
    let decl = load_protocol(&args.path)?;
    let reliable = decl.reliable();
    let ann = AnnotatedGlobal::new(decl.body.clone());
    if args.config {
        let c0 = derive_canonical_config(&ann, &reliable).map_err(|e| {
            eprintln!("{}: error: {e}", args.path.display());
            exit::FAILED
        })?;
        let arrow = Arrow::Reliable(reliable.clone());
        bfs_print(c0, |c| config_transitions(c, &arrow), |c| c.to_string(), args.depth);
    } else {
        bfs_print(ann, |a| global_transitions(a, &reliable), describe_global, args.depth);
    }
    Ok(exit::OK)
}

fn describe_global(a: &AnnotatedGlobal) -> String {
    let crashed: Vec<String> = a.crashed.iter().map(Role::to_string).collect();
    format!("{{{}}} {}", crashed.join(","), render_global_brief(&a.g))
}

/// Prints every state first reached within `depth` steps, with the labels
/// of a shortest path to it.
fn bfs_print<S: Clone + Eq + std::hash::Hash>(
    init: S,
    succ: impl Fn(&S) -> Vec<(TransitionLabel, S)>,
    show: impl Fn(&S) -> String,
    depth: usize,
) {
    let mut seen: HashSet<S> = HashSet::from([init.clone()]);
    let mut queue: VecDeque<(S, Vec<String>)> = VecDeque::from([(init, Vec::new())]);
    let mut count = 0;
    while let Some((s, path)) = queue.pop_front() {
        count += 1;
        let trace = if path.is_empty() { "ε".to_string() } else { path.join(" · ") };
        out!("[{}] {trace}\n      {}", path.len(), show(&s));
        if path.len() == depth {
            continue;
        }
        for (l, n) in succ(&s) {
            if seen.insert(n.clone()) {
                let mut p = path.clone();
                p.push(l.to_string());
                queue.push_back((n, p));
            }
        }
    }
    out!("{count} states within depth {depth}");
}

pub fn typecheck(protocol: &Path, processes: &Path, lenient: bool) -> u8 {
    code(typecheck_inner(protocol, processes, lenient))
}

fn typecheck_inner(protocol: &Path, processes: &Path, lenient: bool) -> Result<u8, u8> {
    let decl = load_protocol(protocol)?;
    let script = load_processes(processes)?;
    let mode = if lenient { TypingMode::Lenient } else { TypingMode::Strict };
    let v = typecheck_session_with(mode, &script.session(), &AnnotatedGlobal::new(decl.body.clone()), &decl.reliable());
    out!("{}: {} ({})", decl.name, style::status(v.status.as_str()), v.reason);
    Ok(if v.is_holds() { exit::OK } else { exit::FAILED })
}

fn parse_crash(spec: &str) -> Option<(usize, Role)> {
    let (role, step) = spec.split_once('@')?;
    Some((step.parse().ok()?, Role::from(role)))
}

pub fn run(args: &RunArgs) -> u8 {
    code(run_inner(args))
}

fn run_inner(args: &RunArgs) -> Result<u8, u8> {
    let decl = load_protocol(&args.protocol)?;
    let script = load_processes(&args.processes)?;
    let reliable = decl.reliable();
    let schedule = match args.seed {
        Some(seed) => {
            CrashSchedule::Seeded { seed, crash_probability: args.crash_probability, max_crashes: args.max_crashes }
        }
        None => {
            let mut events = Vec::new();
            for spec in &args.crash {
                let Some((step, role)) = parse_crash(spec) else {
                    eprintln!("--crash expects ROLE@STEP, got {spec:?}");
                    return Err(exit::FAILED);
                };
                if reliable.contains(&role) {
                    eprintln!("--crash: {role} is reliable");
                    return Err(exit::FAILED);
                }
                events.push((step, role));
            }
            CrashSchedule::Exact(events)
        }
    };
    let m0 = script.session();
    let trace = run_session(&m0, &reliable, &schedule, args.max_steps);
    let conforming = trace.outcome == Outcome::Quiescent && is_conforming_quiescent(&trace.final_state);
    let outcome = match trace.outcome {
        Outcome::Quiescent if conforming => "quiescent",
        Outcome::Quiescent => "stuck",
        Outcome::MaxStepsExceeded => "max-steps-exceeded",
    };
    let rep = TraceReport::new(&trace, conforming, outcome);
    if let Some(path) = &args.trace {
        let text = serde_json::to_string_pretty(&rep).expect("trace serializes");
        std::fs::write(path, text + "\n").map_err(|e| {
            eprintln!("{}: {e}", path.display());
            exit::IO
        })?;
    }
    if args.json {
        out!("{}", serde_json::to_string_pretty(&rep).expect("trace serializes"));
    } else {
        for e in &rep.trace {
            out!("{:>4}  {:<28} {}", e.step, e.label, e.digest);
        }
        out!("final: {}", trace.final_state);
        for d in &rep.diagnostics {
            out!("diagnostic: {d}");
        }
        out!("outcome: {outcome}");
    }
    Ok(match trace.outcome {
        Outcome::Quiescent if conforming => exit::OK,
        Outcome::Quiescent => exit::FAILED,
        Outcome::MaxStepsExceeded => exit::INCONCLUSIVE,
    })
}
