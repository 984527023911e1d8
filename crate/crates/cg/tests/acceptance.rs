//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::SeedableRng;

use cg::analogy::{find_views, SearchOptions};
use cg::argue::{complete_labelings, detect_attacks, grounded_labeling, inherit_attacks, Label};
use cg::cli::{argue_scope, load_corpus, load_source};
use cg::graph::{
    check_view, compose, is_total, parse_term, translate, AttackProvenance, ContextGraph, Morphism,
    MorphismStatus,
};
use cg::kernel::{alpha_eq, substitute, QName, Term, TypingContext};
use cg::pushout::verify_universal_property;
use cg::syntax::{
    parse_graph, parse_graph_with_env, print_graph, print_graph_with_env, tokenize, FixityEnv,
};

use common::*;

fn equalish(g: &ContextGraph, a: &Term, b: &Term) -> bool {
    TypingContext::with_unfold_bound(g, g.unfold_bound)
        .equal(a, b)
        .unwrap_or(false)
}

/// 1. Corpus reproduction: checking and elaborating the shipped case yields
///    exactly the five application theories with the expected rulings, fast.
#[test]
fn acceptance_1_corpus_reproduction() {
    let started = Instant::now();
    let g = load_corpus().expect("corpus checks and elaborates");
    let elapsed = started.elapsed();

    let applications: Vec<&str> = g.pushouts.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(
        applications,
        [
            "PvH-Asp-Gray",
            "PvH-Asp-Default",
            "PvH-Alt",
            "PvH-Asp-McCart",
            "PvH-Ruling"
        ],
        "the five applications, in opinion order"
    );
    let generated: BTreeSet<&str> = g
        .theories()
        .iter()
        .filter(|t| t.generated_by.is_some())
        .map(|t| t.name.as_str())
        .collect();
    assert_eq!(
        generated,
        applications.iter().copied().collect::<BTreeSet<_>>()
    );

    let ruling = g
        .declaration(&QName::new("PvH-Ruling", "PvH_ruling"))
        .and_then(|d| d.ty.clone())
        .expect("PvH-Ruling's ruling is present and checked");
    let claim = parse_term(&g, "PvH-Ruling", "⊢ Popov has_claim ball", None).unwrap();
    assert!(equalish(&g, &ruling, &claim));

    let alt = g
        .declaration(&QName::new("PvH-Alt", "PvH_ruling"))
        .and_then(|d| d.ty.clone())
        .expect("PvH-Alt's ruling is present and checked");
    let no_claim = parse_term(&g, "PvH-Alt", "⊢ ¬ (Popov has_claim ball)", None).unwrap();
    assert!(equalish(&g, &alt, &no_claim));

    assert!(
        elapsed.as_secs_f64() < 2.0,
        "check + elaborate took {elapsed:?}, budget is 2s"
    );
    println!(
        "[acceptance] 1 corpus reproduction: PASS ({} theories, {:?})",
        g.theories().len(),
        elapsed
    );
}

/// 2. Attack and labeling reproduction: exactly two edges (base + inherited)
///    and the grounded labeling defeating the default line.
#[test]
fn acceptance_2_attacks_and_labeling() {
    let g = load_corpus().unwrap();
    let scope = argue_scope(&g);
    let base = detect_attacks(&g, &scope).unwrap();
    let edges = inherit_attacks(&g, &base).unwrap();
    assert_eq!(edges.len(), 2, "exactly two edges: {edges:?}");
    assert_eq!(
        (edges[0].attacker.as_str(), edges[0].target.as_str()),
        ("PvH-Asp-McCart", "PvH-Asp-Default")
    );
    assert!(matches!(edges[0].provenance, AttackProvenance::Detected));
    assert_eq!(
        (edges[1].attacker.as_str(), edges[1].target.as_str()),
        ("PvH-Ruling", "PvH-Alt")
    );
    assert!(matches!(
        edges[1].provenance,
        AttackProvenance::Inherited { .. }
    ));

    let labeling = grounded_labeling(&scope, &edges);
    assert_eq!(labeling.label("PvH-Asp-Default"), Label::Out);
    assert_eq!(labeling.label("PvH-Alt"), Label::Out);
    for standing in ["PvH-Asp-Gray", "PvH-Asp-McCart", "PvH-Ruling"] {
        assert_eq!(labeling.label(standing), Label::In, "{standing}");
    }
    println!("[acceptance] 2 attack/labeling reproduction: PASS (2 edges, default line OUT)");
}

/// 3. Kernel properties over generated well-typed terms: normalization is
///    idempotent and type-preserving, substitution satisfies its lemma, and
///    definitional equality is an equivalence.
#[test]
fn acceptance_3_kernel_properties() {
    let sig = GenSig::new();
    let mut rng = StdRng::seed_from_u64(0xC0FFEE);
    let mut terms = 0usize;
    let mut subst_instances = 0usize;

    while terms < 1000 {
        let ty = gen_type(&mut rng, 2);
        let t = gen_term(&mut rng, &ty, 3);
        terms += 1;
        let mut ctx = TypingContext::new(&sig);
        ctx.check(&t, &ty).expect("generated terms are well-typed");

        // normalize is idempotent and preserves the type
        let nf = ctx.normalize(&t).expect("normalizes");
        let nf2 = ctx.normalize(&nf).expect("normal forms normalize");
        assert!(alpha_eq(&nf, &nf2), "idempotence failed for {t}");
        ctx.check(&nf, &ty)
            .expect("type preserved under normalization");

        // equal is an equivalence: reflexivity, symmetry and transitivity
        // across beta-expanded variants
        let e1 = Term::app(Term::lambda("z", Some(ty.clone()), Term::Var(0)), t.clone());
        let e2 = Term::app(
            Term::lambda("z", Some(c("iota")), cg::kernel::shift(&e1, 1, 0)),
            c("a"),
        );
        assert!(ctx.equal(&t, &t).unwrap());
        assert!(ctx.equal(&t, &e1).unwrap() && ctx.equal(&e1, &t).unwrap());
        assert!(ctx.equal(&e1, &e2).unwrap());
        assert!(ctx.equal(&t, &e2).unwrap(), "transitivity failed");

        // substitution lemma on every generated function type
        if let Term::Pi {
            domain, codomain, ..
        } = &ty
        {
            if let Term::Lambda { body, .. } = &t {
                let a = gen_term(&mut rng, domain, 2);
                let body_inst = substitute(body, &a);
                let cod_inst = substitute(codomain, &a);
                ctx.check(&body_inst, &cod_inst)
                    .expect("substitution lemma instance");
                subst_instances += 1;
            }
        }
    }
    assert!(
        subst_instances > 100,
        "enough substitution-lemma instances ({subst_instances})"
    );
    println!(
        "[acceptance] 3 kernel properties: PASS ({terms} terms, {subst_instances} substitution instances)"
    );
}

/// 4. Pushout universal property on random small instances: a compatible
///    cocone admits exactly one mediating morphism, confirmed by brute force.
#[test]
fn acceptance_4_pushout_universal_property() {
    let mut rng = StdRng::seed_from_u64(0x9050);
    let mut instances = 0usize;
    let mut negatives = 0usize;
    let mut seed_tag = 0usize;
    while instances < 100 {
        seed_tag += 1;
        let instance = gen_pushout_instance(&mut rng, seed_tag);
        let g = load_source(&instance.source)
            .unwrap_or_else(|e| panic!("instance loads: {e:?}\n{}", instance.source));
        let psi = g.view("psi").expect("cocone leg").clone();
        let c_leg = g.include_morphism("C", "D").unwrap();

        let mediator = verify_universal_property(&g, "P", &psi, &c_leg)
            .unwrap_or_else(|e| panic!("mediator exists: {e}\n{}", instance.source));
        let found = oracle_mediators(&g, "P", &psi, &c_leg);
        assert_eq!(found.len(), 1, "mediator unique\n{}", instance.source);
        let record = g.pushout("P").unwrap();
        for (copy, target) in &found[0] {
            assert_eq!(
                mediator.assignment.get(copy),
                Some(&Term::Const(target.clone())),
                "brute force agrees with the construction"
            );
        }
        let _ = record;
        instances += 1;

        // An incompatible cocone has no mediator.
        if let Some((constant, alt)) = &instance.alt_assignment {
            let mut broken = psi.clone();
            broken.assignment.insert(
                QName::new("A", constant.clone()),
                Term::Const(QName::new("C", alt.clone())),
            );
            let err = verify_universal_property(&g, "P", &broken, &c_leg);
            assert!(err.is_err(), "incompatible cocone must be rejected");
            negatives += 1;
        }
    }
    println!(
        "[acceptance] 4 pushout universal property: PASS ({instances} instances, {negatives} incompatible cocones rejected)"
    );
}

/// 5. Translation functoriality on the corpus: composing then translating
///    equals translating twice, for every composable morphism pair, on every
///    declared type and definiens of the domain; translation also preserves
///    typing along every verified view.
#[test]
fn acceptance_5_translation_functoriality() {
    let g = load_corpus().unwrap();
    let mut morphisms: Vec<Morphism> = g.views().to_vec();
    for t in g.theories() {
        for dep in t.imports() {
            morphisms.push(g.include_morphism(dep, &t.name).unwrap());
        }
    }
    let mut pairs = 0usize;
    let mut checked_terms = 0usize;
    for m1 in &morphisms {
        if !matches!(m1.status, MorphismStatus::Verified) {
            continue;
        }
        for m2 in &morphisms {
            if m1.codomain != m2.domain || !matches!(m2.status, MorphismStatus::Verified) {
                continue;
            }
            let composed = compose(&g, m1, m2).unwrap();
            pairs += 1;
            for entry in g.flatten(&m1.domain).unwrap() {
                let decl = g.declaration(&entry.qname).unwrap();
                let mut battery = vec![Term::Const(entry.qname.clone())];
                battery.extend(decl.ty.clone());
                battery.extend(decl.def.clone());
                for t in battery {
                    let via_composed = translate(&g, &composed, &t);
                    let via_steps = translate(&g, m1, &t).and_then(|u| translate(&g, m2, &u));
                    match (via_composed, via_steps) {
                        (Ok(a), Ok(b)) => {
                            assert!(
                                equalish(&g, &a, &b),
                                "functoriality broke on {} ; {} at {t}",
                                m1.name,
                                m2.name
                            );
                            checked_terms += 1;
                        }
                        (Err(_), Err(_)) => {}
                        (a, b) => panic!("routes disagree on definedness for {t}: {a:?} vs {b:?}"),
                    }
                }
            }
        }
    }
    assert!(pairs >= 10, "corpus offers composable pairs ({pairs})");

    // Type preservation of translation, on every corpus view.
    let mut preserved = 0usize;
    for v in g.views() {
        if !matches!(v.status, MorphismStatus::Verified) {
            continue;
        }
        for entry in g.flatten(&v.domain).unwrap() {
            let decl = g.declaration(&entry.qname).unwrap();
            let (Some(ty), Ok(image)) = (
                decl.ty.clone(),
                translate(&g, v, &Term::Const(entry.qname.clone())),
            ) else {
                continue;
            };
            let Ok(ty_image) = translate(&g, v, &ty) else {
                continue;
            };
            let mut ctx = TypingContext::with_unfold_bound(&g, g.unfold_bound);
            ctx.check(&image, &ty_image).unwrap_or_else(|e| {
                panic!(
                    "translation along {} broke typing of {}: {e}",
                    v.name, entry.qname
                )
            });
            preserved += 1;
        }
    }
    println!(
        "[acceptance] 5 translation functoriality: PASS ({pairs} pairs, {checked_terms} terms, {preserved} typings preserved)"
    );
}

/// 6. Labeling oracle: the grounded labeling equals the unique minimal-IN
///    complete labeling found by brute force, and the complete sets agree.
#[test]
fn acceptance_6_labeling_oracle() {
    let mut rng = StdRng::seed_from_u64(0x1AB31);
    let mut graphs = 0usize;
    while graphs < 200 {
        let (nodes, edges) = gen_attack_graph(&mut rng, 10);
        let grounded = grounded_labeling(&nodes, &edges);
        let oracle = oracle_grounded(&nodes, &edges);
        assert_eq!(grounded.labels, oracle, "grounded mismatch on {nodes:?}");

        let all = complete_labelings(&nodes, &edges).unwrap();
        let impl_set: BTreeSet<Vec<(String, Label)>> = all
            .iter()
            .map(|l| l.labels.iter().map(|(k, v)| (k.clone(), *v)).collect())
            .collect();
        let oracle_set: BTreeSet<Vec<(String, Label)>> = oracle_complete_labelings(&nodes, &edges)
            .iter()
            .map(|l| l.iter().map(|(k, v)| (k.clone(), *v)).collect())
            .collect();
        assert_eq!(
            impl_set, oracle_set,
            "complete labelings mismatch on {nodes:?}"
        );
        graphs += 1;
    }
    println!("[acceptance] 6 labeling oracle: PASS ({graphs} graphs)");
}

/// 7. View-finder oracle: search equals brute-force enumeration on toys; on
///    the corpus, the precedent view is recovered first with score 1 on the
///    reduct and is non-total on the full aspects theory.
#[test]
fn acceptance_7_view_finder_oracle() {
    let mut rng = StdRng::seed_from_u64(0xF1AD);
    let mut toys = 0usize;
    while toys < 50 {
        let toy = gen_view_toy(&mut rng);
        let g =
            load_source(&toy.source).unwrap_or_else(|e| panic!("toy loads: {e:?}\n{}", toy.source));
        for allow_partial in [false, true] {
            let found = find_views(
                &g,
                &toy.domain,
                &toy.codomain,
                SearchOptions {
                    allow_partial,
                    ..Default::default()
                },
            )
            .unwrap();
            let oracle = oracle_find_views(&g, &toy.domain, &toy.codomain, allow_partial);
            assert_eq!(found.len(), oracle.len(), "count mismatch\n{}", toy.source);
            for (candidate, (expected, mapped, total)) in found.iter().zip(oracle.iter()) {
                assert_eq!(&candidate.assignment, expected, "\n{}", toy.source);
                assert_eq!(candidate.mapped, *mapped);
                assert_eq!(candidate.total, *total);
            }
        }
        // A1 existence agrees with the brute-force run.
        let verdict = cg::analogy::check_a1(&g, &toy.codomain, &toy.domain).unwrap();
        let oracle_holds = oracle_find_views(&g, &toy.domain, &toy.codomain, true)
            .iter()
            .any(|(m, _, _)| !m.is_empty());
        assert_eq!(
            verdict.holds, oracle_holds,
            "A1 disagreement\n{}",
            toy.source
        );
        toys += 1;
    }

    let g = load_corpus().unwrap();
    let found = find_views(
        &g,
        "relevance-Reduct",
        "PvH-Asp-Default",
        SearchOptions {
            allow_partial: true,
            ..Default::default()
        },
    )
    .unwrap();
    let best = &found[0];
    assert_eq!(best.score(), 1.0);
    assert!(best.is_total());
    assert_eq!(
        best.assignment
            .get(&QName::new("relevance-Reduct", "Aspect")),
        Some(&QName::new("PvH-Asp-Default", "Π"))
    );
    let m = best.to_morphism("recovered", "relevance-Reduct", "PvH-Asp-Default");
    assert!(check_view(&g, &m).unwrap().is_total());
    let (total, missing) = is_total(&g, &m, "MvS-Aspects").unwrap();
    assert!(!total);
    let names: Vec<&str> = missing.iter().map(|q| q.name.as_str()).collect();
    assert_eq!(names, ["check", "bank"]);
    println!("[acceptance] 7 view-finder oracle: PASS ({toys} toys + corpus recovery)");
}

/// 8. Round-trip: parse→print→parse is a fixed point on the corpus and on
///    generated files.
#[test]
fn acceptance_8_round_trip() {
    // Corpus: one normalization pass, then a fixed point.
    let mut env = FixityEnv::new();
    let folnd = parse_graph_with_env(&tokenize(cg::cli::FOLND_SOURCE).unwrap(), &mut env).unwrap();
    let env_after_prelude = env.clone();
    let pvh = parse_graph_with_env(&tokenize(cg::cli::PVH_SOURCE).unwrap(), &mut env).unwrap();
    for (ast, starting_env) in [(folnd, FixityEnv::new()), (pvh, env_after_prelude)] {
        let printed = print_graph_with_env(&ast, starting_env.clone());
        let mut env2 = starting_env.clone();
        let reparsed = parse_graph_with_env(&tokenize(&printed).unwrap(), &mut env2).unwrap();
        assert_eq!(ast, reparsed, "corpus reparse differs");
        let reprinted = print_graph_with_env(&reparsed, starting_env);
        assert_eq!(printed, reprinted, "printing is not a fixed point");
    }

    let mut rng = StdRng::seed_from_u64(0x707);
    let mut files = 0usize;
    while files < 500 {
        let ast = gen_source_file(&mut rng);
        let printed = print_graph(&ast);
        let tokens = tokenize(&printed)
            .unwrap_or_else(|e| panic!("printed output lexes: {e}\n---\n{printed}"));
        let reparsed = parse_graph(&tokens)
            .unwrap_or_else(|e| panic!("printed output parses: {e}\n---\n{printed}"));
        assert_eq!(ast, reparsed, "round-trip mismatch:\n{printed}");
        assert_eq!(print_graph(&reparsed), printed, "second print differs");
        files += 1;
    }
    println!("[acceptance] 8 round-trip: PASS (corpus + {files} generated files)");
}
