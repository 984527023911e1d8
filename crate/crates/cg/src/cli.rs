//! Command-line driver: loading `.cg` files (imports, prelude resolution),
//! the corpus shipped with the binary, and the export formats.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analogy::{find_views, SearchOptions, DEFAULT_SEARCH_BUDGET};
use crate::argue::{defeated_report, detect_attacks, inherit_attacks, label, Labeling, Semantics};
use crate::graph::{
    is_generated, print_term, theory_to_item, view_to_item, AttackEdge, AttackProvenance,
    ContextGraph, Diagnostic, Elaborator, MorphismKind,
};
use crate::kernel::DEFAULT_UNFOLD_BOUND;
use crate::pushout::{compute_pushout, PushoutRequest};
use crate::syntax::{print_graph_with_env, tokenize, FixityEnv, Item, SourceFile};

/// The prelude and demo corpus, embedded so the binary and tests work
/// without a file layout.
pub const FOLND_SOURCE: &str = include_str!("../corpus/folnd.cg");
pub const PVH_SOURCE: &str = include_str!("../corpus/pvh.cg");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgCommand {
    Check,
    Flatten,
    Elaborate,
    Argue,
    Analogies,
    Dot,
    Json,
}

/// One invocation of the driver: a single command over some input files.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CgCommand,
    pub inputs: Vec<PathBuf>,
    pub semantics: Semantics,
    pub output: Option<PathBuf>,
    pub allow_partial: bool,
    pub unfold_bound: u64,
    pub search_budget: u64,
    pub max_results: usize,
    pub json: bool,
    /// `flatten --theory`.
    pub theory: Option<String>,
    /// `analogies --from/--to`.
    pub from: Option<String>,
    pub to: Option<String>,
}

impl RunConfig {
    pub fn new(command: CgCommand, inputs: Vec<PathBuf>) -> Self {
        RunConfig {
            command,
            inputs,
            semantics: Semantics::Grounded,
            output: None,
            allow_partial: false,
            unfold_bound: DEFAULT_UNFOLD_BOUND,
            search_budget: DEFAULT_SEARCH_BUDGET,
            max_results: usize::MAX,
            json: false,
            theory: None,
            from: None,
            to: None,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Loads files into a context graph, resolving `import` items against
/// `CG_PRELUDE`, the importing file's directory, and the embedded prelude.
pub struct Loader {
    pub graph: ContextGraph,
    env: FixityEnv,
    loaded: BTreeSet<String>,
    allow_partial: bool,
    pub diagnostics: Vec<Diagnostic>,
    /// Parsed sources in load order (file name, items).
    pub sources: Vec<(String, SourceFile)>,
}

impl Loader {
    pub fn new(allow_partial: bool, unfold_bound: u64) -> Self {
        let mut graph = ContextGraph::new();
        graph.unfold_bound = unfold_bound;
        Loader {
            graph,
            env: FixityEnv::new(),
            loaded: BTreeSet::new(),
            allow_partial,
            diagnostics: Vec::new(),
            sources: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn load_path(&mut self, path: &Path) -> Result<(), String> {
        let key = path
            .canonicalize()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|_| path.display().to_string());
        if !self.loaded.insert(key) {
            return Ok(());
        }
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        self.load_text(&path.display().to_string(), &text, path.parent())
    }

    /// Parse and process one source, item by item.
    pub fn load_text(&mut self, name: &str, text: &str, dir: Option<&Path>) -> Result<(), String> {
        let tokens = match tokenize(text) {
            Ok(t) => t,
            Err(e) => {
                self.diagnostics.push(Diagnostic {
                    theory: None,
                    declaration: None,
                    span: Some(e.span()),
                    message: format!("{name}: {e}"),
                });
                return Ok(());
            }
        };
        // Items are parsed one at a time so that an `import` takes effect
        // (operator fixities included) before the rest of the file parses.
        let mut items = Vec::new();
        let mut pos = 0;
        loop {
            if !self.diagnostics.is_empty() {
                break;
            }
            let item = match crate::syntax::parse_next_item(&tokens, &mut pos, &mut self.env) {
                Ok(Some(item)) => item,
                Ok(None) => break,
                Err(e) => {
                    self.diagnostics.push(Diagnostic {
                        theory: None,
                        declaration: None,
                        span: Some(e.span()),
                        message: format!("{name}: {e}"),
                    });
                    break;
                }
            };
            items.push(item.clone());
            match &item {
                Item::Import(imp) => self.resolve_import(&imp.name, dir)?,
                Item::Theory(t) => {
                    if let Err(ds) = self.graph.add_theory_item(t) {
                        self.diagnostics.extend(ds);
                    } else if self.graph.prelude.is_none() {
                        // The first theory declaring the judgment formers is
                        // the prelude: later theories default their meta to
                        // it, and its connectives drive assumption/contrary
                        // handling. Works whether it arrives by `import`, as
                        // an explicit input, or embedded.
                        let theory = self.graph.theory(&t.name).expect("just inserted");
                        let judgmental =
                            ["bool", "⊢", "⊦~"].iter().all(|n| theory.decl(n).is_some());
                        if judgmental {
                            self.graph.prelude = Some(t.name.clone());
                        }
                    }
                }
                Item::View(v) => {
                    if let Err(ds) = self.graph.add_view_item(v, self.allow_partial) {
                        self.diagnostics.extend(ds);
                    }
                }
                Item::Pushout(p) => {
                    let request = PushoutRequest {
                        name: p.name.clone(),
                        rule: p.rule.clone(),
                        view: p.view.clone(),
                        renaming: p.renaming.iter().cloned().collect(),
                    };
                    if let Err(e) = compute_pushout(&mut self.graph, &request) {
                        self.diagnostics.push(Diagnostic {
                            theory: Some(p.name.clone()),
                            declaration: None,
                            span: Some(p.span),
                            message: e.to_string(),
                        });
                    }
                }
                Item::Attack(a) => {
                    let result = (|| {
                        let mut elab = Elaborator::for_theory(&self.graph, &a.attacker)?;
                        let witness = elab.elaborate(&a.witness, None)?;
                        let check = crate::argue::verify_attack(
                            &self.graph,
                            &a.attacker,
                            &a.target,
                            &witness,
                        )?;
                        Ok::<_, crate::graph::GraphError>((witness, check))
                    })();
                    match result {
                        Ok((witness, check)) if check.holds => {
                            self.graph.asserted_attacks.push(AttackEdge {
                                attacker: a.attacker.clone(),
                                target: a.target.clone(),
                                witness,
                                provenance: AttackProvenance::Asserted,
                                verified: true,
                            });
                        }
                        Ok((_, check)) => self.diagnostics.push(Diagnostic {
                            theory: Some(a.attacker.clone()),
                            declaration: None,
                            span: Some(a.span),
                            message: format!(
                                "attack assertion does not verify: {}",
                                check.diagnosis
                            ),
                        }),
                        Err(e) => self.diagnostics.push(Diagnostic {
                            theory: Some(a.attacker.clone()),
                            declaration: None,
                            span: Some(a.span),
                            message: e.to_string(),
                        }),
                    }
                }
            }
        }
        self.sources.push((name.to_string(), SourceFile { items }));
        Ok(())
    }

    fn resolve_import(&mut self, name: &str, dir: Option<&Path>) -> Result<(), String> {
        // CG_PRELUDE wins when it names this import.
        if let Ok(p) = std::env::var("CG_PRELUDE") {
            let path = PathBuf::from(&p);
            if path.file_stem().is_some_and(|s| s == name) && path.exists() {
                return self.load_import_path(&path);
            }
        }
        if let Some(dir) = dir {
            let candidate = dir.join(format!("{name}.cg"));
            if candidate.exists() {
                return self.load_import_path(&candidate);
            }
        }
        if name == "folnd" {
            let key = "builtin:folnd".to_string();
            if self.loaded.insert(key) {
                return self.load_text("<builtin folnd.cg>", FOLND_SOURCE, None);
            }
            return Ok(());
        }
        Err(format!("cannot resolve import `{name}`"))
    }

    fn load_import_path(&mut self, path: &Path) -> Result<(), String> {
        let key = path
            .canonicalize()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|_| path.display().to_string());
        if !self.loaded.insert(key) {
            return Ok(());
        }
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        self.load_text(&path.display().to_string(), &text, path.parent())
    }
}

/// Load the embedded Popov v. Hayashi corpus (prelude included) and compute
/// all of its rule applications.
pub fn load_corpus() -> Result<ContextGraph, Vec<Diagnostic>> {
    let mut loader = Loader::new(false, DEFAULT_UNFOLD_BOUND);
    loader
        .load_text("<builtin pvh.cg>", PVH_SOURCE, None)
        .map_err(|e| {
            vec![Diagnostic {
                theory: None,
                declaration: None,
                span: None,
                message: e,
            }]
        })?;
    if loader.ok() {
        Ok(loader.graph)
    } else {
        Err(loader.diagnostics)
    }
}

/// Load arbitrary source text against the embedded prelude (used by tests
/// and the library API). The text may itself `import folnd`; if it does not,
/// the prelude is loaded first anyway.
pub fn load_source(text: &str) -> Result<ContextGraph, Vec<Diagnostic>> {
    let mut loader = Loader::new(false, DEFAULT_UNFOLD_BOUND);
    let wrap = |e: String| {
        vec![Diagnostic {
            theory: None,
            declaration: None,
            span: None,
            message: e,
        }]
    };
    loader
        .load_text("<builtin folnd.cg>", FOLND_SOURCE, None)
        .map_err(wrap)?;
    loader.loaded.insert("builtin:folnd".to_string());
    loader.load_text("<source>", text, None).map_err(wrap)?;
    if loader.ok() {
        Ok(loader.graph)
    } else {
        Err(loader.diagnostics)
    }
}

/// The attack graph used for reports: detection over every non-prelude
/// theory, lifted along includes, plus verified assertions.
pub fn attack_graph(graph: &ContextGraph) -> Result<Vec<AttackEdge>, crate::graph::GraphError> {
    let scope = argue_scope(graph);
    let base = detect_attacks(graph, &scope)?;
    let mut edges = inherit_attacks(graph, &base)?;
    for asserted in &graph.asserted_attacks {
        let dup = edges.iter().any(|e| {
            e.attacker == asserted.attacker
                && e.target == asserted.target
                && e.witness == asserted.witness
        });
        if !dup {
            edges.push(asserted.clone());
        }
    }
    Ok(edges)
}

/// Every theory except the prelude itself.
pub fn argue_scope(graph: &ContextGraph) -> Vec<String> {
    graph
        .theories()
        .iter()
        .map(|t| t.name.clone())
        .filter(|n| Some(n) != graph.prelude.as_ref())
        .collect()
}

#[derive(Serialize)]
struct NodeDto {
    name: String,
    label: String,
}

#[derive(Serialize)]
struct EdgeDto {
    from: String,
    to: String,
    witness: String,
    provenance: String,
}

#[derive(Serialize)]
struct ArgueDto {
    semantics: String,
    nodes: Vec<NodeDto>,
    edges: Vec<EdgeDto>,
    defeated: Vec<String>,
    distinguished: Vec<String>,
    inconsistent: Vec<String>,
}

/// The `argue` report: nodes with labels, edges with witnesses, and the
/// defeat summary, as JSON.
pub fn argue_report(
    graph: &ContextGraph,
    semantics: Semantics,
) -> Result<(String, Labeling), crate::graph::GraphError> {
    let scope = argue_scope(graph);
    let edges = attack_graph(graph)?;
    let labeling = label(&scope, &edges, semantics)?;
    let report = defeated_report(graph, &labeling, &edges);
    let mut nodes: Vec<NodeDto> = scope
        .iter()
        .map(|n| NodeDto {
            name: n.clone(),
            label: labeling.label(n).to_string(),
        })
        .collect();
    nodes.sort_by(|a, b| a.name.cmp(&b.name));
    let mut edge_dtos = Vec::new();
    for e in &edges {
        edge_dtos.push(EdgeDto {
            from: e.attacker.clone(),
            to: e.target.clone(),
            witness: print_term(graph, &e.attacker, &e.witness)?,
            provenance: match &e.provenance {
                AttackProvenance::Asserted => "asserted".to_string(),
                AttackProvenance::Detected => "detected".to_string(),
                AttackProvenance::Inherited {
                    base_attacker,
                    base_target,
                } => {
                    format!("inherited from {base_attacker} -> {base_target}")
                }
            },
        });
    }
    let dto = ArgueDto {
        semantics: match semantics {
            Semantics::Grounded => "grounded",
            Semantics::Complete => "complete",
            Semantics::Preferred => "preferred",
        }
        .to_string(),
        nodes,
        edges: edge_dtos,
        defeated: report.defeated,
        distinguished: report.distinguished,
        inconsistent: report.inconsistent,
    };
    let json = serde_json::to_string_pretty(&dto).expect("report serializes");
    Ok((json, labeling))
}

/// DOT export: one box per theory (pushout-generated ones marked and
/// filled), solid include edges, dashed view edges, bold red attack edges.
/// Node and edge order is sorted, so output is stable.
pub fn export_dot(graph: &ContextGraph) -> Result<String, crate::graph::GraphError> {
    let mut out = String::new();
    out.push_str("digraph context_graph {\n  rankdir=BT;\n  node [shape=box];\n");
    let mut names: Vec<&str> = graph.theories().iter().map(|t| t.name.as_str()).collect();
    names.sort_unstable();
    for name in &names {
        let theory = graph.theory(name).expect("listed theory exists");
        if theory.generated_by.is_some() {
            let _ = writeln!(
                out,
                "  \"{name}\" [label=\"{name}\\n(pushout)\", style=filled, fillcolor=lightblue];"
            );
        } else {
            let _ = writeln!(out, "  \"{name}\" [label=\"{name}\"];");
        }
    }
    let mut edges: Vec<String> = Vec::new();
    for t in graph.theories() {
        for inc in t.imports() {
            edges.push(format!("  \"{inc}\" -> \"{}\" [style=solid];", t.name));
        }
    }
    for v in graph.views() {
        if v.kind == MorphismKind::View {
            edges.push(format!(
                "  \"{}\" -> \"{}\" [style=dashed, label=\"{}\"];",
                v.domain, v.codomain, v.name
            ));
        }
    }
    for e in attack_graph(graph)? {
        edges.push(format!(
            "  \"{}\" -> \"{}\" [style=bold, color=red, label=\"attack\"];",
            e.attacker, e.target
        ));
    }
    edges.sort();
    edges.dedup();
    for e in edges {
        out.push_str(&e);
        out.push('\n');
    }
    out.push_str("}\n");
    Ok(out)
}

/// Materialize the elaborated graph as parseable `.cg` text: the prelude
/// import, every non-prelude theory (generated ones included, as plain
/// theories), then every view. Re-checking the dump yields no diagnostics.
pub fn export_elaborated(graph: &ContextGraph) -> Result<String, crate::graph::GraphError> {
    let mut file = SourceFile::default();
    file.items.push(Item::Import(crate::syntax::ImportItem {
        name: "folnd".to_string(),
        span: crate::span::Span::default(),
    }));
    for theory in graph.theories() {
        if Some(&theory.name) == graph.prelude.as_ref() {
            continue;
        }
        file.items
            .push(Item::Theory(theory_to_item(graph, theory)?));
    }
    for view in graph.views() {
        file.items.push(Item::View(view_to_item(graph, view)?));
    }
    Ok(print_graph_with_env(&file, graph.fixities()))
}

#[derive(Serialize)]
struct DeclDto {
    name: String,
    #[serde(rename = "type")]
    ty: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    definiens: Option<String>,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_from: Option<String>,
}

#[derive(Serialize)]
struct TheoryDto {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<String>,
    includes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_by: Option<String>,
    declarations: Vec<DeclDto>,
}

#[derive(Serialize)]
struct ViewDto {
    name: String,
    domain: String,
    codomain: String,
    status: String,
    assignments: Vec<(String, String)>,
}

#[derive(Serialize)]
struct PushoutDto {
    name: String,
    condition: String,
    rule: String,
    view: String,
    case: String,
    induced: String,
}

#[derive(Serialize)]
struct GraphDto {
    prelude: Option<String>,
    theories: Vec<TheoryDto>,
    views: Vec<ViewDto>,
    pushouts: Vec<PushoutDto>,
}

/// Whole-graph JSON dump with printed terms.
pub fn export_json(graph: &ContextGraph) -> Result<String, crate::graph::GraphError> {
    let mut theories = Vec::new();
    for t in graph.theories() {
        let mut declarations = Vec::new();
        for d in &t.decls {
            declarations.push(DeclDto {
                name: d.name.clone(),
                ty: match &d.ty {
                    Some(ty) => print_term(graph, &t.name, ty)?,
                    None => String::new(),
                },
                definiens: match &d.def {
                    Some(def) => Some(print_term(graph, &t.name, def)?),
                    None => None,
                },
                kind: match d.kind {
                    crate::graph::DeclKind::Plain => "plain".to_string(),
                    crate::graph::DeclKind::Assumption => "assumption".to_string(),
                },
                generated_from: match &d.origin {
                    crate::graph::DeclOrigin::Generated { from, .. } => Some(from.to_string()),
                    crate::graph::DeclOrigin::Local => None,
                },
            });
        }
        theories.push(TheoryDto {
            name: t.name.clone(),
            meta: t.meta.clone(),
            includes: t.includes.clone(),
            generated_by: t.generated_by.clone(),
            declarations,
        });
    }
    let mut views = Vec::new();
    for v in graph.views() {
        let mut assignments = Vec::new();
        for (q, term) in &v.assignment {
            assignments.push((q.to_string(), print_term(graph, &v.codomain, term)?));
        }
        views.push(ViewDto {
            name: v.name.clone(),
            domain: v.domain.clone(),
            codomain: v.codomain.clone(),
            status: match &v.status {
                crate::graph::MorphismStatus::Verified => "verified".to_string(),
                crate::graph::MorphismStatus::Unchecked => "unchecked".to_string(),
                crate::graph::MorphismStatus::Partial { .. } => "partial".to_string(),
            },
            assignments,
        });
    }
    let pushouts = graph
        .pushouts
        .iter()
        .map(|p| PushoutDto {
            name: p.name.clone(),
            condition: p.condition.clone(),
            rule: p.rule.clone(),
            view: p.view.clone(),
            case: p.case.clone(),
            induced: p.induced.clone(),
        })
        .collect();
    let dto = GraphDto {
        prelude: graph.prelude.clone(),
        theories,
        views,
        pushouts,
    };
    Ok(serde_json::to_string_pretty(&dto).expect("graph serializes"))
}

fn emit(config: &RunConfig, text: &str) -> Result<(), String> {
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Run one command. Returns the process exit code; diagnostics go to stderr.
pub fn run(config: &RunConfig) -> i32 {
    let mut loader = Loader::new(config.allow_partial, config.unfold_bound);
    for path in &config.inputs {
        if !path.exists() {
            eprintln!("error: no such file: {}", path.display());
            return EXIT_IO;
        }
        if let Err(e) = loader.load_path(path) {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    }
    if !loader.ok() {
        for d in &loader.diagnostics {
            eprintln!("error: {d}");
        }
        return EXIT_DIAGNOSTICS;
    }
    let graph = &loader.graph;

    let outcome: Result<(), String> = match config.command {
        CgCommand::Check => {
            let theories = graph.theories().len();
            let decls: usize = graph.theories().iter().map(|t| t.decls.len()).sum();
            let generated: usize = graph
                .theories()
                .iter()
                .flat_map(|t| t.decls.iter())
                .filter(|d| is_generated(d))
                .count();
            println!(
                "checked {decls} declarations in {theories} theories ({generated} generated), {} views, {} pushouts",
                graph.views().len(),
                graph.pushouts.len()
            );
            Ok(())
        }
        CgCommand::Flatten => {
            let Some(theory) = &config.theory else {
                eprintln!("error: flatten needs --theory");
                return EXIT_USAGE;
            };
            (|| {
                let mut out = String::new();
                for entry in graph.flatten(theory).map_err(|e| e.to_string())? {
                    let decl = graph
                        .declaration(&entry.qname)
                        .expect("flattened declaration");
                    let rendered = crate::graph::print_declaration(graph, theory, decl)
                        .map_err(|e| e.to_string())?;
                    let origin = match &entry.included_from {
                        Some(v) => format!("  // from {}, via {v}", entry.qname.theory),
                        None => String::new(),
                    };
                    let _ = writeln!(out, "{rendered}{origin}");
                }
                emit(config, out.trim_end())
            })()
        }
        CgCommand::Elaborate => (|| {
            emit(
                config,
                &export_elaborated(graph).map_err(|e| e.to_string())?,
            )
        })(),
        CgCommand::Argue => (|| {
            let (json, _) = argue_report(graph, config.semantics).map_err(|e| e.to_string())?;
            emit(config, &json)
        })(),
        CgCommand::Analogies => {
            let (Some(from), Some(to)) = (&config.from, &config.to) else {
                eprintln!("error: analogies needs --from and --to");
                return EXIT_USAGE;
            };
            (|| {
                let options = SearchOptions {
                    max_results: config.max_results,
                    allow_partial: config.allow_partial,
                    budget: config.search_budget,
                };
                let candidates = find_views(graph, from, to, options).map_err(|e| e.to_string())?;
                if config.json {
                    #[derive(Serialize)]
                    struct CandidateDto {
                        score: f64,
                        total: bool,
                        assignment: Vec<(String, String)>,
                        obligations: Vec<(String, String)>,
                    }
                    let dtos: Vec<CandidateDto> = candidates
                        .iter()
                        .map(|c| CandidateDto {
                            score: c.score(),
                            total: c.is_total(),
                            assignment: c
                                .assignment
                                .iter()
                                .map(|(k, v)| (k.to_string(), v.to_string()))
                                .collect(),
                            obligations: c
                                .obligations
                                .iter()
                                .map(|(k, v)| (k.to_string(), v.to_string()))
                                .collect(),
                        })
                        .collect();
                    emit(
                        config,
                        &serde_json::to_string_pretty(&dtos).expect("serializes"),
                    )
                } else {
                    let mut out = String::new();
                    for (i, c) in candidates.iter().enumerate() {
                        let _ = writeln!(
                            out,
                            "{}. score {:.3} ({})",
                            i + 1,
                            c.score(),
                            if c.is_total() { "total" } else { "partial" }
                        );
                        for (k, v) in &c.assignment {
                            let _ = writeln!(out, "     {} := {}", k.name, v.name);
                        }
                    }
                    if candidates.is_empty() {
                        out.push_str("no candidate views found\n");
                    }
                    emit(config, out.trim_end())
                }
            })()
        }
        CgCommand::Dot => (|| emit(config, &export_dot(graph).map_err(|e| e.to_string())?))(),
        CgCommand::Json => (|| emit(config, &export_json(graph).map_err(|e| e.to_string())?))(),
    };

    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DIAGNOSTICS
        }
    }
}
