use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};

use lvw_core::analysis::{
    check_expressiveness_preservation, check_invariant_property, check_language_refinement,
    check_property_preservation, write_text, Invariance, ModelBounds,
};
use lvw_core::feature_model::{self, FeatureModel, VariantSelection};
use lvw_core::reduction::{flatten, FlatAutomaton, Priority};
use lvw_core::semantics::{
    inner_sem_bounded, intersect_sem, model_refines, sem_bounded, sem_bounded_many, MachineBounds,
    MachineSet, MappingSelection, PartialMapping, RealizationTag, Refinement,
};
use lvw_core::syntax::{
    check_presentation_agreement, check_presentation_expressibility, detect_notation,
    exists_presentation_option, load_corpus, parse, read_corpus, unparse, ConcreteText, Notation,
};
use lvw_core::system_model::{
    check_domain_refinement, enumerate_system_models, parse_sm, PropId, SmBounds, SubReading,
};
use lvw_core::{AbstractStatechart, ConstraintId, PropertyId, VariationPointId};

use crate::{
    Cli, Command, ConfigCommand, DomainArgs, ExportFormat, FeatmodelCommand, LangArgs, MachineArgs,
    NotationArg, PresoptArgs, PresoptCommand, PriorityArg, SysmodelCommand,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl From<bool> for Outcome {
    fn from(passed: bool) -> Self {
        if passed {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Pass => ExitCode::SUCCESS,
            Outcome::Fail => ExitCode::from(1),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let reports = cli.reports.as_path();
    match &cli.command {
        Command::Parse {
            files,
            lang,
            render,
        } => cmd_parse(files, lang, *render),
        Command::Reduce {
            file,
            lang,
            priority,
        } => cmd_reduce(file, lang, *priority),
        Command::Config {
            command: ConfigCommand::Validate { fm, select },
        } => cmd_config_validate(fm.as_deref(), select),
        Command::Sem {
            models,
            lang,
            sel,
            inner,
            refines,
            machines,
            list,
        } => cmd_sem(
            models,
            lang,
            sel.as_deref(),
            *inner,
            refines.as_deref(),
            machines,
            *list,
            reports,
        ),
        Command::Refine {
            v1,
            v2,
            corpus,
            lang,
            machines,
            preserve,
        } => cmd_refine(v1, v2, corpus, lang, machines, preserve.as_deref(), reports),
        Command::Invariant {
            prop,
            vp,
            corpus,
            base,
            lang,
            machines,
        } => cmd_invariant(prop, vp, corpus, base, lang, machines, reports),
        Command::Express {
            constraint,
            sel,
            model_states,
            machines,
        } => cmd_express(constraint, sel, *model_states, machines, reports),
        Command::Presopt { command } => cmd_presopt(command),
        Command::Sysmodel { command } => cmd_sysmodel(command, reports),
        Command::Featmodel { command } => cmd_featmodel(command),
    }
}

fn load_fm(path: Option<&Path>) -> Result<FeatureModel> {
    match path {
        None => Ok(feature_model::shipped()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            feature_model::parse_fm(&text).with_context(|| format!("{}", p.display()))
        }
    }
}

fn split_features(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Validated selection from `--select`, or the permissive one.
fn selection(lang: &LangArgs) -> Result<VariantSelection> {
    let Some(select) = &lang.select else {
        return Ok(VariantSelection::permissive());
    };
    let fm = load_fm(lang.fm.as_deref())?;
    fm.validate_config(&split_features(select)).map_err(|vs| {
        let lines: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
        anyhow!("invalid selection: {}", lines.join("; "))
    })
}

fn read_model(path: &Path, sel: &VariantSelection) -> Result<AbstractStatechart> {
    let source = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let notation = detect_notation(&source);
    parse(&ConcreteText::new(source, notation), sel).map_err(|f| {
        let lines: Vec<String> = f
            .diagnostics
            .iter()
            .map(|d| format!("{}:{d}", path.display()))
            .collect();
        anyhow!("{}", lines.join("\n"))
    })
}

fn read_flat(path: &Path, sel: &VariantSelection) -> Result<FlatAutomaton> {
    Ok(flatten(&read_model(path, sel)?, sel.priority()))
}

fn read_flat_corpus(path: &Path, sel: &VariantSelection) -> Result<Vec<FlatAutomaton>> {
    let models = load_corpus(path, sel)?;
    if models.is_empty() {
        bail!("no .sc files under {}", path.display());
    }
    Ok(models
        .iter()
        .map(|(_, m)| flatten(m, sel.priority()))
        .collect())
}

fn machine_bounds(m: &MachineArgs) -> Result<MachineBounds> {
    let tags: Vec<RealizationTag> = if m.tags.trim().eq_ignore_ascii_case("all") {
        RealizationTag::ALL.to_vec()
    } else {
        split_features(&m.tags)
            .iter()
            .map(|t| t.parse::<RealizationTag>().map_err(|e| anyhow!(e)))
            .collect::<Result<_>>()?
    };
    Ok(MachineBounds::new(m.max_states, tags))
}

fn full_selection(s: &str) -> Result<MappingSelection> {
    Ok(s.parse::<MappingSelection>()?)
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

fn emit_report(dir: &Path, name: &str, text: &str) -> Result<()> {
    print!("{text}");
    let path = write_text(dir, &slug(name), text)
        .with_context(|| format!("writing report to {}", dir.display()))?;
    println!("evidence: {}", path.display());
    Ok(())
}

fn cmd_parse(files: &[PathBuf], lang: &LangArgs, render: Option<NotationArg>) -> Result<Outcome> {
    if files.is_empty() {
        bail!("no input files");
    }
    let sel = selection(lang)?;
    for f in files {
        let source = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        let m = read_model(f, &sel)?;
        let notation = match render {
            Some(NotationArg::Arrow) => Notation::Arrow,
            Some(NotationArg::Keyword) => Notation::Keyword,
            None => detect_notation(&source),
        };
        print!("{}", unparse(&m, notation).source);
    }
    Ok(Outcome::Pass)
}

fn cmd_reduce(file: &Path, lang: &LangArgs, priority: Option<PriorityArg>) -> Result<Outcome> {
    let sel = selection(lang)?;
    let m = read_model(file, &sel)?;
    let p = match priority {
        Some(PriorityArg::Inner) => Priority::InnerFirst,
        Some(PriorityArg::Outer) => Priority::OuterFirst,
        None => sel.priority(),
    };
    print!(
        "{}",
        unparse(&flatten(&m, p).to_statechart(), Notation::Arrow).source
    );
    Ok(Outcome::Pass)
}

fn cmd_config_validate(fm: Option<&Path>, select: &str) -> Result<Outcome> {
    let fm = load_fm(fm)?;
    match fm.validate_config(&split_features(select)) {
        Ok(sel) => {
            println!("valid");
            print!("{sel}");
            Ok(Outcome::Pass)
        }
        Err(vs) => {
            for v in vs {
                println!("violation: {v}");
            }
            Ok(Outcome::Fail)
        }
    }
}

fn print_set(label: &str, set: &MachineSet, list: bool) {
    println!("{label}: {} of {} machines", set.len(), set.space.len());
    if list {
        for s in set.machines() {
            println!("{s}");
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sem(
    models: &[PathBuf],
    lang: &LangArgs,
    sel: Option<&str>,
    inner: bool,
    refines: Option<&Path>,
    machines: &MachineArgs,
    list: bool,
    reports: &Path,
) -> Result<Outcome> {
    if models.is_empty() {
        bail!("no models given");
    }
    let lang_sel = selection(lang)?;
    let bounds = machine_bounds(machines)?;
    let flats: Vec<FlatAutomaton> = models
        .iter()
        .map(|p| read_flat(p, &lang_sel))
        .collect::<Result<_>>()?;

    if let Some(original) = refines {
        let [refined] = &flats[..] else {
            bail!("--refines takes exactly one model");
        };
        let mapping = full_selection(sel.ok_or_else(|| anyhow!("--refines needs --sel"))?)?;
        let orig = read_flat(original, &lang_sel)?;
        let outcome = model_refines(refined, &orig, mapping, &bounds)?;
        let mut text = format!(
            "check: model refinement {} refines {} sel={mapping}\nbounds: max_states={}\n",
            refined.name, orig.name, bounds.max_states
        );
        let passed = matches!(outcome, Refinement::Holds);
        text.push_str(if passed {
            "verdict: PASS\n"
        } else {
            "verdict: FAIL\n"
        });
        if let Refinement::Fails { witness } = outcome {
            text.push_str("counterexample:\n");
            for line in witness.to_string().lines() {
                text.push_str("  ");
                text.push_str(line);
                text.push('\n');
            }
        }
        emit_report(
            reports,
            &format!("sem-refines-{}-{}", refined.name, orig.name),
            &text,
        )?;
        return Ok(passed.into());
    }

    let mut sets = Vec::new();
    for m in &flats {
        let set = if inner {
            let partial = PartialMapping::parse(sel.unwrap_or(""), true)?;
            let completions = partial.completions();
            if completions.len() == MappingSelection::ALL.len() {
                inner_sem_bounded(m, &bounds)?
            } else {
                let parts = sem_bounded_many(m, &completions, &bounds)?;
                let mut it = parts.into_iter();
                let first = it.next().expect("at least one completion");
                it.try_fold(first, |acc, s| acc.union(&s))?
            }
        } else {
            let s = sel.ok_or_else(|| anyhow!("--sel is required unless --inner is given"))?;
            sem_bounded(m, full_selection(s)?, &bounds)?
        };
        if flats.len() > 1 {
            print_set(&m.name, &set, false);
        }
        sets.push(set);
    }
    let total = intersect_sem(&sets)?;
    let label = if flats.len() > 1 {
        "integrated"
    } else {
        flats[0].name.as_str()
    };
    print_set(label, &total, list);
    Ok(Outcome::Pass)
}

fn cmd_refine(
    v1: &str,
    v2: &str,
    corpus: &Path,
    lang: &LangArgs,
    machines: &MachineArgs,
    preserve: Option<&str>,
    reports: &Path,
) -> Result<Outcome> {
    let (v1, v2) = (full_selection(v1)?, full_selection(v2)?);
    let sel = selection(lang)?;
    let bounds = machine_bounds(machines)?;
    let models = read_flat_corpus(corpus, &sel)?;
    let report = check_language_refinement(v1, v2, &models, &bounds)?;
    emit_report(reports, &format!("refine-{v1}-{v2}"), &report.render())?;
    let Some(prop) = preserve else {
        return Ok(report.passed().into());
    };
    let prop: PropertyId = prop.parse()?;
    if !report.passed() {
        bail!("cannot check preservation of {prop}: the refinement does not hold");
    }
    let mut passed = true;
    for m in &models {
        let r = check_property_preservation(prop, m, v1, v2, &bounds, &report)?;
        passed &= r.passed();
        emit_report(
            reports,
            &format!("preserve-{prop}-{}-{v1}-{v2}", m.name),
            &r.render(),
        )?;
    }
    Ok(passed.into())
}

fn cmd_invariant(
    prop: &str,
    vp: &str,
    corpus: &Path,
    base: &str,
    lang: &LangArgs,
    machines: &MachineArgs,
    reports: &Path,
) -> Result<Outcome> {
    let prop: PropertyId = prop.parse()?;
    let vp: VariationPointId = vp.parse()?;
    let base = full_selection(base)?;
    let sel = selection(lang)?;
    let models = read_flat_corpus(corpus, &sel)?;
    let report = check_invariant_property(prop, vp, &models, base, &machine_bounds(machines)?)?;
    emit_report(reports, &format!("invariant-{prop}-{vp}"), &report.render())?;
    Ok((report.outcome == Invariance::Global).into())
}

fn cmd_express(
    constraint: &str,
    sel: &str,
    model_states: usize,
    machines: &MachineArgs,
    reports: &Path,
) -> Result<Outcome> {
    let c: ConstraintId = constraint.parse()?;
    let sel = full_selection(sel)?;
    let model_bounds = ModelBounds {
        max_states: model_states,
        ..ModelBounds::default()
    };
    let report =
        check_expressiveness_preservation(c, model_bounds, &machine_bounds(machines)?, sel)?;
    emit_report(reports, &format!("express-{c}-{sel}"), &report.render())?;
    Ok(report.passed().into())
}

fn presopt_selections(args: &PresoptArgs) -> Result<(VariantSelection, VariantSelection)> {
    let fm = feature_model::shipped();
    let pick = |s: &Option<String>, default: VariantSelection| -> Result<VariantSelection> {
        match s {
            None => Ok(default),
            Some(s) => fm.validate_config(&split_features(s)).map_err(|vs| {
                anyhow!(
                    "invalid selection: {:?}",
                    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>()
                )
            }),
        }
    };
    let mut base_default = VariantSelection::permissive();
    base_default.presentation.clear();
    base_default.selected.remove("Keyword");
    Ok((
        pick(&args.base, base_default)?,
        pick(&args.variant, VariantSelection::permissive())?,
    ))
}

fn cmd_presopt(command: &PresoptCommand) -> Result<Outcome> {
    let args = match command {
        PresoptCommand::Agree(a) | PresoptCommand::Express(a) | PresoptCommand::Exists(a) => a,
    };
    let (base, variant) = presopt_selections(args)?;
    let files = read_corpus(&args.corpus)?;
    let texts: Vec<ConcreteText> = files.iter().map(|(_, t)| t.clone()).collect();
    let name = |i: usize| files[i].0.display().to_string();
    match command {
        PresoptCommand::Agree(_) => {
            let r = check_presentation_agreement(&texts, &base, &variant);
            println!(
                "texts: {}, common: {}, base only: {}, variant only: {}, neither: {}",
                r.texts, r.common, r.base_only, r.variant_only, r.neither
            );
            match &r.witness {
                None => println!("agreement: PASS"),
                Some(w) => println!("agreement: FAIL at {}", name(w.index)),
            }
            Ok(r.passed().into())
        }
        PresoptCommand::Express(_) => {
            let r = check_presentation_expressibility(&texts, &base, &variant);
            for (n, k) in &r.per_notation {
                println!("{n}: {k} texts");
            }
            match &r.failure {
                None => println!("expressibility: PASS ({} checked)", r.checked),
                Some(f) => println!("expressibility: FAIL at {}: {}", name(f.index), f.reason),
            }
            Ok(r.passed().into())
        }
        PresoptCommand::Exists(_) => match exists_presentation_option(&texts, &variant) {
            Some((i, j)) => {
                println!("presentation option: {} and {}", name(i), name(j));
                Ok(Outcome::Pass)
            }
            None => {
                println!("no two texts share an abstract model");
                Ok(Outcome::Fail)
            }
        },
    }
}

fn reading(sub_reflexive: bool) -> SubReading {
    if sub_reflexive {
        SubReading::Reflexive
    } else {
        SubReading::Irreflexive
    }
}

fn domain_bounds(d: &DomainArgs) -> Result<SmBounds> {
    Ok(d.bounds.parse::<SmBounds>()?)
}

fn cmd_sysmodel(command: &SysmodelCommand, reports: &Path) -> Result<Outcome> {
    match command {
        SysmodelCommand::Check {
            file,
            sub_reflexive,
        } => {
            let text =
                fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let sm = parse_sm(&text).with_context(|| format!("{}", file.display()))?;
            for p in PropId::REGISTRY {
                println!("{p}: {}", p.eval(&sm, reading(*sub_reflexive)));
            }
            Ok(Outcome::Pass)
        }
        SysmodelCommand::Refine {
            strong,
            weak,
            domain,
        } => {
            let (strong, weak): (PropId, PropId) = (strong.parse()?, weak.parse()?);
            let report = check_domain_refinement(
                strong,
                weak,
                domain_bounds(domain)?,
                reading(domain.sub_reflexive),
            )?;
            emit_report(
                reports,
                &format!("sysmodel-{strong}-{weak}"),
                &report.render(),
            )?;
            Ok(report.passed().into())
        }
        SysmodelCommand::Enumerate { domain, list } => {
            let space = enumerate_system_models(domain_bounds(domain)?)?;
            println!("labeled system models: {}", space.len());
            if *list {
                for sm in space.iter() {
                    println!("{sm}");
                }
            }
            Ok(Outcome::Pass)
        }
    }
}

fn cmd_featmodel(command: &FeatmodelCommand) -> Result<Outcome> {
    match command {
        FeatmodelCommand::Export { fm, format } => {
            let fm = load_fm(fm.as_deref())?;
            match format {
                ExportFormat::Dot => print!("{}", fm.export_dot()),
                ExportFormat::Fm => print!("{}", fm.export()),
            }
            Ok(Outcome::Pass)
        }
        FeatmodelCommand::Check { fm } => {
            let fm = load_fm(fm.as_deref())?;
            fm.check()?;
            println!(
                "ok: {} features, {} xor groups, {} requires, {} refines",
                fm.features().len(),
                fm.xor_groups().len(),
                fm.requires.len(),
                fm.refines.len()
            );
            Ok(Outcome::Pass)
        }
        FeatmodelCommand::Refine {
            fm,
            from,
            to,
            evidence,
            out,
        } => {
            let model = load_fm(fm.as_deref())?;
            let text = fs::read_to_string(evidence)
                .with_context(|| format!("reading {}", evidence.display()))?;
            if !text.lines().any(|l| l == "verdict: PASS") {
                bail!("{} does not record a passing check", evidence.display());
            }
            let updated = model.add_refinement_edge(from, to, &evidence.display().to_string())?;
            match out {
                Some(p) => fs::write(p, updated.export())
                    .with_context(|| format!("writing {}", p.display()))?,
                None => print!("{}", updated.export()),
            }
            Ok(Outcome::Pass)
        }
    }
}
