//! One function per subcommand. Each reads its inputs (hashing them into
//! the session digest), fills the session report and writes any output
//! file.

use std::path::{Path, PathBuf};

use reductio_core::factor::{nmf_upper_bound, rank_lower_bound, trivial_factorization, verify_factorization, NonnegFactorization};
use reductio_core::gadgets::{
    build_matching_3reg, maxcut_to_sparsestcut, maxxor_to_maxcut, ug_to_balsep, ug_to_csp, validate_gadget,
    verify_balsep_completeness, verify_power_completeness, verify_ug_csp_completeness, GadgetTemplate, UgCspKind,
};
use reductio_core::gadgets::sparsest::powered_vertex_count;
use reductio_core::graph::Graph;
use reductio_core::lasserre::{
    assignment_indicators, csp_to_conflict_graph, pe_compose, pe_from_distribution, pe_verify, vertex_indicators,
    verify_conflict_reduction, PseudoExpectation,
};
use reductio_core::matrix::Matrix;
use reductio_core::problems::{all_words, k22_family, GraphObjective, MatchingProblem, Sense, UniformGraphProblem};
use reductio_core::reduction::{verify_fractional_reduction, verify_reduction, FractionalReductionRecord, ReductionRecord};
use reductio_core::slack::exact_slack;
use reductio_core::suite::{select, xor_instances, Status};
use reductio_core::table::ProblemTable;
use reductio_core::treewidth::treewidth_exact;
use reductio_core::twlp::{
    build_objective, build_uniform_lp, compute_alpha, closed_form_size_bound, size_bound, solve_uniform_lp, sweep, tw_family,
    verify_alpha, AdmissibleProblem, TwInstance, TwProblemKind, MAX_TW_VERTICES,
};
use reductio_core::Rational;

use crate::formats::{read_csp, read_graph, read_graphs, read_json, read_text, read_ug, write_json, AlphaJson, ModelJson};
use crate::{
    corpus, CliError, Command, LasserreCmd, ReduceBuild, ReduceCmd, ReductionName, Session, Side, SlackCmd,
    SlackProblem, SuiteCmd, TwlpCmd,
};

pub fn dispatch(cmd: &Command, s: &mut Session) -> Result<(), CliError> {
    match cmd {
        Command::Reduce { action: ReduceCmd::Build(args) } => reduce_build(args, s),
        Command::Reduce { action: ReduceCmd::Verify { record } } => reduce_verify(record, s),
        Command::Slack { action } => slack(action, s),
        Command::Twlp { action } => twlp(action, s),
        Command::Lasserre { action } => lasserre(action, s),
        Command::Suite { action: SuiteCmd::Run { filter } } => suite_run(filter, s),
        Command::Corpus(args) => corpus_cmd(&args.out, args.check.as_deref(), s),
    }
}

fn rational(name: &str, text: &str, s: &mut Session) -> Result<Rational, CliError> {
    s.inputs.param(name, text);
    text.parse()
        .map_err(|e| CliError::Input(format!("--{name}: {e}")))
}

fn input_file(path: &Path, s: &mut Session) -> Result<(), CliError> {
    s.inputs.file(path)
}

fn write_output<T: serde::Serialize>(out: &Option<PathBuf>, value: &T, s: &mut Session) -> Result<(), CliError> {
    if let Some(p) = out {
        write_json(p, value)?;
        s.report.result("output", p.display());
    }
    Ok(())
}

fn reduce_build(a: &ReduceBuild, s: &mut Session) -> Result<(), CliError> {
    let default_eps = match a.name {
        ReductionName::Balsep => "1/4",
        ReductionName::Ug1f | ReductionName::UgNoteq => "1/2",
        _ => "0",
    };
    let eps = rational("eps", a.eps.as_deref().unwrap_or(default_eps), s)?;
    s.inputs.param("name", format!("{:?}", a.name));
    if let Some(p) = &a.input {
        input_file(p, s)?;
    }
    match a.name {
        ReductionName::Matching3reg => {
            s.inputs.param("n", a.n);
            s.enumeration_limit("K_2n", 2 * a.n)?;
            let (g, red) = build_matching_3reg(a.n, &eps)?;
            s.report.add("", &verify_reduction(&red)?);
            s.report.result("targetVertices", g.num_vertices());
            s.report.result("sourceInstances", red.source.num_instances());
            write_output(&a.output, &red, s)
        }
        ReductionName::MaxxorMaxcut => {
            let delta = rational("delta", &a.delta, s)?;
            let insts = match &a.input {
                Some(p) => read_csp(p)?,
                None => xor_instances()?,
            };
            let template: GadgetTemplate = match &a.template {
                Some(p) => {
                    input_file(p, s)?;
                    read_json(p)?
                }
                None => GadgetTemplate::standard(),
            };
            s.report.add("gadget", &validate_gadget(&template));
            let (g, red) = maxxor_to_maxcut(&insts, &template, &eps, &delta)?;
            s.report.add("record", &verify_reduction(&red)?);
            s.report.result("targetVertices", g.num_vertices());
            write_output(&a.output, &red, s)
        }
        ReductionName::Sparsest => {
            let c1 = rational("c1", &a.c1, s)?;
            let s1 = rational("s1", &a.s1, s)?;
            s.inputs.param("l", a.l);
            let graphs = match &a.input {
                Some(p) => read_graphs(p)?,
                None => vec![Graph::path(2)],
            };
            let n = graphs[0].n() + 2;
            s.enumeration_limit("the powered instance", powered_vertex_count(n, a.l))?;
            let red = maxcut_to_sparsestcut(&graphs, a.l, &c1, &s1)?;
            s.report.add("record", &verify_fractional_reduction(&red)?);
            for (i, g) in graphs.iter().enumerate() {
                for sub in 0..1u64 << g.n() {
                    let v = verify_power_completeness(g, sub, a.l)?;
                    if let Some(c) = v.first_failure() {
                        s.report.check(
                            &format!("completeness.graph{i}"),
                            Some(format!("s = {sub}: {} {}", c.name, c.witness.clone().unwrap_or_default())),
                        );
                    }
                }
            }
            s.report.check("completeness", None);
            s.report.result("poweredVertices", powered_vertex_count(n, a.l));
            write_output(&a.output, &red, s)
        }
        ReductionName::Balsep => {
            let delta = rational("delta", &a.delta, s)?;
            let s1 = rational("s1", &a.s1, s)?;
            let s2 = rational("s2", &a.s2, s)?;
            let insts = match &a.input {
                Some(p) => read_ug(p)?,
                None => k22_family(),
            };
            let (_, red) = ug_to_balsep(&insts, &eps, &delta, &s1, &s2)?;
            s.report.add("record", &verify_reduction(&red)?);
            for (i, ug) in insts.iter().enumerate() {
                s.report.add(&format!("instance{i}"), &verify_balsep_completeness(ug, &eps)?);
            }
            write_output(&a.output, &red, s)
        }
        ReductionName::Ug1f | ReductionName::UgNoteq => {
            let zeta = rational("zeta", &a.zeta, s)?;
            let s1 = rational("s1", &a.s1, s)?;
            let s2 = rational("s2", &a.s2, s)?;
            s.inputs.param("t", a.t);
            s.inputs.param("modulus", a.modulus);
            let kind = if a.name == ReductionName::Ug1f {
                UgCspKind::OneFree
            } else {
                UgCspKind::NotEqual { modulus: a.modulus }
            };
            let insts = match &a.input {
                Some(p) => read_ug(p)?,
                None => k22_family(),
            };
            let red = ug_to_csp(&insts, kind, a.t, &eps, &zeta, &s1, &s2)?;
            s.report.add("record", &verify_reduction(&red.record)?);
            s.report.add("correction", &verify_factorization(&red.record.m2, &red.correction));
            for (i, ug) in insts.iter().enumerate() {
                s.report.add(&format!("instance{i}"), &verify_ug_csp_completeness(ug, kind, a.t, &eps)?);
            }
            s.report.result("correctionFactors", red.correction.factors.len());
            write_output(&a.output, &red, s)
        }
    }
}

fn reduce_verify(path: &Path, s: &mut Session) -> Result<(), CliError> {
    input_file(path, s)?;
    let value: serde_json::Value = read_json(path)?;
    let parse_err = |e: serde_json::Error| CliError::Input(format!("{}: not a reduction record: {e}", path.display()));
    if value.get("m1n").is_some() {
        let red: FractionalReductionRecord = serde_json::from_value(value).map_err(parse_err)?;
        s.report.add("", &verify_fractional_reduction(&red)?);
    } else {
        // UG→CSP builds wrap the record together with the correction factors.
        let (red, correction): (ReductionRecord, Option<NonnegFactorization>) = match value.get("record") {
            Some(inner) => (
                serde_json::from_value(inner.clone()).map_err(parse_err)?,
                value.get("correction").map(|c| serde_json::from_value(c.clone())).transpose().map_err(parse_err)?,
            ),
            None => (serde_json::from_value(value).map_err(parse_err)?, None),
        };
        s.report.add("", &verify_reduction(&red)?);
        if let Some(f) = correction {
            s.report.add("correction", &verify_factorization(&red.m2, &f));
        }
    }
    Ok(())
}

fn read_matrix(path: &Path, s: &mut Session) -> Result<Matrix, CliError> {
    input_file(path, s)?;
    read_json(path)
}

fn slack(cmd: &SlackCmd, s: &mut Session) -> Result<(), CliError> {
    match cmd {
        SlackCmd::Build { problem, host, n, record, side, output } => {
            let exact;
            let m = if let Some(r) = record {
                input_file(r, s)?;
                s.inputs.param("side", format!("{side:?}"));
                let red: ReductionRecord = read_json(r)?;
                exact = false;
                match side {
                    Side::Source => red.source_slack()?,
                    Side::Target => red.target_slack()?,
                }
                .entries
            } else {
                let problem = problem.unwrap_or(SlackProblem::Matching);
                s.inputs.param("problem", format!("{problem:?}"));
                exact = true;
                let table = match problem {
                    SlackProblem::Matching => {
                        let h = match host {
                            Some(p) => {
                                input_file(p, s)?;
                                read_graph(p)?
                            }
                            None => Graph::complete(4),
                        };
                        s.enumeration_limit("the host graph", h.n())?;
                        if h.num_edges() > 12 {
                            return Err(CliError::Input(format!("host has {} edges; at most 12 are enumerated", h.num_edges())));
                        }
                        ProblemTable::from_problem(&MatchingProblem::all_subgraphs(h))?
                    }
                    other => {
                        s.inputs.param("n", n);
                        if *n > 5 {
                            return Err(CliError::Input(format!("n = {n}: every graph on [n] is enumerated only for n <= 5")));
                        }
                        let kind = match other {
                            SlackProblem::IndependentSet => GraphObjective::IndependentSet,
                            SlackProblem::VertexCover => GraphObjective::VertexCover,
                            _ => GraphObjective::MaxCut,
                        };
                        ProblemTable::from_problem(&UniformGraphProblem::all(kind, *n))?
                    }
                };
                exact_slack(&table)?.entries
            };
            s.report.check("nonnegative", m.first_negative().map(|(i, j)| format!("entry ({i}, {j}) = {}", m.get(i, j))));
            if exact {
                let bad = (0..m.rows()).find(|&i| m.row(i).iter().all(|x| !x.is_zero()));
                s.report.check("row_minimum_zero", bad.map(|i| format!("row {i} has no zero entry")));
            }
            s.report.result("rows", m.rows());
            s.report.result("cols", m.cols());
            s.report.result("rankLowerBound", rank_lower_bound(&m));
            s.report.result("trivialSize", trivial_factorization(&m)?.size());
            write_output(output, &m, s)
        }
        SlackCmd::Verify { matrix, factorization } => {
            let m = read_matrix(matrix, s)?;
            input_file(factorization, s)?;
            let f: NonnegFactorization = read_json(factorization)?;
            s.report.add("", &verify_factorization(&m, &f));
            s.report.result("size", f.size());
            Ok(())
        }
        SlackCmd::Nmf { matrix, rank, iters, output } => {
            let m = read_matrix(matrix, s)?;
            s.inputs.param("rank", rank);
            s.inputs.param("iters", iters);
            let out = nmf_upper_bound(&m, *rank, *iters, s.seed)?;
            let tol = s.tol;
            s.report.check("residual", (out.residual > tol).then(|| format!("residual {:e} > {tol:e}", out.residual)));
            match &out.certified {
                Some(f) => {
                    s.report.add("certified", &verify_factorization(&m, f));
                    write_output(output, f, s)?;
                }
                None => s.report.check("certified", Some("rounding did not give an exact factorization".into())),
            }
            s.report.result("residual", format!("{:.3e}", out.residual));
            Ok(())
        }
    }
}

fn problem_kind(name: &str, s: &mut Session) -> Result<TwProblemKind, CliError> {
    s.inputs.param("problem", name);
    let canonical = match name.to_ascii_lowercase().as_str() {
        "is" => "IndependentSet",
        "vc" => "VertexCover",
        "maxcut" => "MaxCUT",
        "ug" | "uniquegames" => "UniqueGames2",
        _ => name,
    };
    Ok(TwProblemKind::parse(canonical)?)
}

fn tw_instance(kind: TwProblemKind, graph: &Path, swaps: &Option<String>, s: &mut Session) -> Result<TwInstance, CliError> {
    input_file(graph, s)?;
    let g = read_graph(graph)?;
    if g.n() > MAX_TW_VERTICES {
        return Err(CliError::Input(format!("{} vertices; the uniform LP handles at most {MAX_TW_VERTICES}", g.n())));
    }
    match (kind, swaps) {
        (TwProblemKind::UniqueGames, sw) => {
            let text = sw.clone().unwrap_or_else(|| "0".repeat(g.num_edges()));
            s.inputs.param("swaps", &text);
            let bits = text
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(CliError::Input(format!("--swaps: unexpected character {c:?}"))),
                })
                .collect::<Result<Vec<bool>, _>>()?;
            Ok(TwInstance::with_swaps(g, bits)?)
        }
        (_, Some(_)) => Err(CliError::Input("--swaps only applies to UniqueGames2".into())),
        (_, None) => Ok(TwInstance::plain(g)),
    }
}

fn twlp(cmd: &TwlpCmd, s: &mut Session) -> Result<(), CliError> {
    match cmd {
        TwlpCmd::Build { problem, n, k, output } => {
            let kind = problem_kind(&problem.problem, s)?;
            s.inputs.param("n", n);
            s.inputs.param("k", k);
            if *n > MAX_TW_VERTICES.min(s.limit_n) {
                return Err(CliError::Input(format!("n = {n} exceeds {}", MAX_TW_VERTICES.min(s.limit_n))));
            }
            let p = AdmissibleProblem::new(kind, *n)?;
            let model = build_uniform_lp(&p, *k)?;
            let bound = size_bound(&p, *k);
            s.report.check(
                "size_bound",
                (model.num_variables() > bound).then(|| format!("{} variables > {bound}", model.num_variables())),
            );
            s.report.result("variables", model.num_variables());
            s.report.result("dimension", model.dimension());
            s.report.result("sizeBound", bound);
            s.report.result("sizeBoundBelowK", closed_form_size_bound(&p, *k));
            write_output(output, &ModelJson::from_model(&model, &p), s)
        }
        TwlpCmd::Solve { problem, graph, k, model, swaps } => {
            let kind = problem_kind(&problem.problem, s)?;
            let inst = tw_instance(kind, graph, swaps, s)?;
            let p = AdmissibleProblem::new(kind, inst.graph.n())?;
            let m = match model {
                Some(path) => {
                    input_file(path, s)?;
                    let m = read_json::<ModelJson>(path)?.into_model()?;
                    if m.kind != kind || m.n != p.n || m.embeddings.len() != p.solutions().len() {
                        return Err(CliError::Input("the model was built for another problem or universe".into()));
                    }
                    m
                }
                None => {
                    s.inputs.param("k", k);
                    build_uniform_lp(&p, *k)?
                }
            };
            let w = build_objective(&m, &p, &inst)?;
            let sol = solve_uniform_lp(&m, &w)?;
            let opt = Rational::from(p.optimum(&inst));
            s.report.check("lp_equals_opt", (sol.value != opt).then(|| format!("LP {} vs brute force {opt}", sol.value)));
            s.report.result("lpValue", &sol.value);
            s.report.result("bruteForce", opt);
            Ok(())
        }
        TwlpCmd::Alpha { problem, graph, root, swaps, output } => {
            let kind = problem_kind(&problem.problem, s)?;
            let inst = tw_instance(kind, graph, swaps, s)?;
            s.inputs.param("root", root);
            let p = AdmissibleProblem::new(kind, inst.graph.n())?;
            let (tw, td) = treewidth_exact(&inst.graph)?;
            let alpha = compute_alpha(&p, &inst, &td, *root)?;
            s.report.add("", &verify_alpha(&p, &inst, &alpha));
            s.report.result("treewidth", tw);
            s.report.result("maxSupportSize", alpha.max_support_size());
            write_output(output, &AlphaJson::new(&p, &alpha), s)
        }
        TwlpCmd::Verify { problem, max_n, k, graphs } => {
            let kind = problem_kind(&problem.problem, s)?;
            s.inputs.param("k", k);
            let family = match graphs {
                Some(path) => {
                    input_file(path, s)?;
                    read_graphs(path)?
                }
                None => {
                    s.inputs.param("max-n", max_n);
                    if *max_n > MAX_TW_VERTICES.min(s.limit_n) {
                        return Err(CliError::Input(format!("--max-n {max_n} exceeds {}", MAX_TW_VERTICES.min(s.limit_n))));
                    }
                    tw_family(*max_n, *k)?
                }
            };
            if let Some(g) = family.iter().find(|g| g.n() > MAX_TW_VERTICES) {
                return Err(CliError::Input(format!("graph on {} vertices; at most {MAX_TW_VERTICES}", g.n())));
            }
            let report = sweep(kind, &family, &[], *k)?;
            s.report.add("", &report.verdict);
            s.report.result("instances", report.rows.len());
            s.report.result("maxAlphaSize", report.max_alpha_size);
            Ok(())
        }
    }
}

fn check_pe_shape(pe: &PseudoExpectation) -> Result<(), CliError> {
    let n = pe.num_points;
    let ok = pe.base.iter().all(|f| f.len() == n)
        && !pe.basis.is_empty()
        && pe.basis.len() == pe.values.len()
        && pe.basis.iter().all(|m| m.values.len() == n && m.factors.iter().all(|&j| j < pe.base.len()));
    if ok {
        Ok(())
    } else {
        Err(CliError::Input("pseudoexpectation vectors have inconsistent lengths".into()))
    }
}

fn lasserre(cmd: &LasserreCmd, s: &mut Session) -> Result<(), CliError> {
    match cmd {
        LasserreCmd::Compose { csp, degree, k, output } => {
            input_file(csp, s)?;
            s.inputs.param("degree", degree);
            s.inputs.param("k", k);
            let inst = read_csp(csp)?.remove(0);
            s.report.add("conflict", &verify_conflict_reduction(&inst)?);
            let g = csp_to_conflict_graph(&inst)?;
            let sets = g.independent_sets()?;
            let words = all_words(inst.num_variables, inst.q);
            let star = words
                .iter()
                .map(|t| {
                    sets.binary_search(&g.star(&inst, t))
                        .map_err(|_| CliError::Verification(format!("t* of {t:?} is not independent")))
                })
                .collect::<Result<Vec<usize>, _>>()?;
            // Uniform over the optimal assignments.
            let (opt, _) = inst.optimum(Sense::Max)?;
            let best: Vec<bool> = words.iter().map(|t| inst.value(t) == opt).collect();
            let count = best.iter().filter(|&&b| b).count() as i64;
            let dist: Vec<Rational> = best
                .iter()
                .map(|&b| if b { Rational::new(1, count) } else { Rational::zero() })
                .collect();
            let pe_i = pe_from_distribution(&dist, assignment_indicators(inst.num_variables, inst.q), *degree)?;
            let pe_g = pe_compose(&pe_i, &star, sets.len(), vertex_indicators(g.graph.n(), &sets), *k)?;
            let val_g: Vec<Rational> = sets.iter().map(|&x| g.value(x)).collect();
            let val_i: Vec<Rational> = words.iter().map(|t| inst.value(t)).collect();
            let m = Rational::from(inst.clauses.len() as i64);
            let (lhs, rhs) = (pe_g.eval(&val_g)?, &m * pe_i.eval(&val_i)?);
            s.report.check("composed_value", (lhs != rhs).then(|| format!("E_G(val_G) = {lhs}, m E_I(val_I) = {rhs}")));
            s.report.add("pe_verify", &pe_verify(&pe_g, s.tol)?);
            s.report.result("composedDegree", pe_g.degree);
            s.report.result("conflictVertices", g.graph.n());
            s.report.result("expectedValue", lhs);
            write_output(output, &pe_g, s)
        }
        LasserreCmd::Verify { pe } => {
            input_file(pe, s)?;
            let pe: PseudoExpectation = read_json(pe)?;
            check_pe_shape(&pe)?;
            s.report.add("", &pe_verify(&pe, s.tol)?);
            s.report.result("degree", pe.degree);
            Ok(())
        }
    }
}

fn suite_run(filter: &str, s: &mut Session) -> Result<(), CliError> {
    s.inputs.param("filter", filter);
    let chosen = select(filter);
    if chosen.is_empty() {
        return Err(CliError::Input(format!("no criterion matches {filter:?}")));
    }
    for c in chosen {
        let prefix = format!("criterion{}", c.id);
        match c.run() {
            Ok(out) => {
                let status = c.status(&out.verdict);
                s.report.add(&prefix, &out.verdict);
                if status == Status::KnownFail {
                    s.tolerated.extend(c.known_failures.iter().map(|n| format!("{prefix}.{n}")));
                }
                s.report.result(&format!("{prefix}.status"), match status {
                    Status::Pass => "pass",
                    Status::KnownFail => "known failure",
                    Status::Fail => "fail",
                });
                for (j, note) in out.notes.iter().enumerate() {
                    s.report.result(&format!("{prefix}.note{j}"), note);
                }
            }
            Err(e) => s.report.check(&format!("{prefix}.error"), Some(e.to_string())),
        }
    }
    Ok(())
}

fn corpus_cmd(out: &Path, check: Option<&Path>, s: &mut Session) -> Result<(), CliError> {
    let files = corpus::generate()?;
    match check {
        Some(dir) => {
            s.inputs.param("check", dir.display());
            for (name, contents) in &files {
                let path = dir.join(name);
                let shipped = read_text(&path)?;
                s.inputs.file(&path)?;
                s.report.check(name, (shipped != *contents).then(|| format!("{} differs from the generator", path.display())));
            }
        }
        None => {
            std::fs::create_dir_all(out).map_err(|e| CliError::Input(format!("cannot create {}: {e}", out.display())))?;
            for (name, contents) in &files {
                let path = out.join(name);
                std::fs::write(&path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
                s.report.check(name, None);
            }
            s.report.result("directory", out.display());
        }
    }
    Ok(())
}
