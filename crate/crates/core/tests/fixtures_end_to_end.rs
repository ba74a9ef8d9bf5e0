mod common;

use std::collections::BTreeMap;

use apilink::classifier::{parse_corpus, train};
use apilink::eval::{evaluate, load_truth, EvalConfig};
use apilink::pipeline::{parse_records, Featurizer, PipelineConfig};

use common::*;

fn scenario(thread: &str) {
    let e = SCENARIOS.iter().find(|e| e.thread == thread).unwrap();
    check_expected(&paper_db(), &model(), "scenarios", e).unwrap();
}

fn ambiguity(thread: &str) {
    let db = extended_db();
    let model = model();
    let mut seen = false;
    for e in AMBIGUITY.iter().filter(|e| e.thread == thread) {
        check_expected(&db, &model, "ambiguity", e).unwrap();
        seen = true;
    }
    assert!(seen);
}

#[test]
fn centrality_picks_the_depended_on_library() {
    scenario("sc-centrality");
}

#[test]
fn betweenness_picks_the_extension() {
    scenario("sc-betweenness");
}

#[test]
fn composition_overwrites_with_the_enclosing_module() {
    scenario("sc-composition");
}

#[test]
fn aggregation_follows_the_neighbor_dependency() {
    scenario("sc-aggregation");
}

#[test]
fn projection_follows_the_neighbor_dependency() {
    scenario("sc-projection");
}

#[test]
fn import_links_object_mapper() {
    scenario("sc-import");
}

#[test]
fn homonymy() {
    ambiguity("amb-1-homonymy");
}

#[test]
fn meronymy() {
    ambiguity("amb-2-meronymy");
}

#[test]
fn synonymy() {
    ambiguity("amb-3-synonymy");
}

#[test]
fn holonymy() {
    ambiguity("amb-4-holonymy");
}

#[test]
fn hypernymy() {
    ambiguity("amb-5-hypernymy");
}

#[test]
fn spuriousness() {
    ambiguity("amb-6-spuriousness");
}

#[test]
fn library_and_person_in_one_thread() {
    let db = extended_db();
    let model = model();
    let records = records_for_dir(&db, &model, "ambiguity");
    let fig: Vec<_> = parse_records(&records, "fig")
        .unwrap()
        .into_iter()
        .filter(|r| r.thread_id == "fig-1")
        .collect();
    assert_eq!(fig.len(), 2);
    assert_eq!(fig[0].api_id.as_deref(), Some("jackson.core"));
    assert_eq!(
        fig[0].url.as_deref(),
        Some("https://github.com/FasterXML/jackson")
    );
    assert_eq!(fig[1].api_id, None);
}

#[test]
fn records_are_byte_identical_and_match_golden() {
    let model = model();
    for (dir, db) in [("scenarios", paper_db()), ("ambiguity", extended_db())] {
        let a = records_for_dir(&db, &model, dir);
        assert_eq!(a, records_for_dir(&db, &model, dir));
        assert_eq!(
            a,
            read(&fixture(&format!("golden/{dir}/records.jsonl"))),
            "{dir}"
        );
    }
}

#[test]
fn html_matches_golden() {
    let model = model();
    for (dir, db) in [("scenarios", paper_db()), ("ambiguity", extended_db())] {
        for (thread, html) in html_for_dir(&db, &model, dir) {
            assert_eq!(
                html,
                read(&fixture(&format!("golden/{dir}/{thread}.html"))),
                "{thread}"
            );
        }
    }
}

#[test]
fn golden_records_score_perfectly_against_truth() {
    for dir in ["scenarios", "ambiguity"] {
        let records =
            parse_records(&read(&fixture(&format!("golden/{dir}/records.jsonl"))), dir).unwrap();
        let truth = load_truth(&fixture(&format!("truth/{dir}.jsonl"))).unwrap();
        let report = evaluate(&records, &truth, &EvalConfig::default()).unwrap();
        let agg = &report.aggregate;
        assert_eq!(agg.detection.f1, 1.0, "{dir}");
        assert_eq!(agg.resolution.f1, 1.0, "{dir}");
        assert_eq!(agg.module_mismatches, 0, "{dir}");
    }
}

#[test]
fn fixture_model_retrains_identically() {
    let db = extended_db();
    let corpus_path = fixture("training/corpus.jsonl");
    let records = parse_corpus(&read(&corpus_path), "corpus").unwrap();
    let docs: BTreeMap<_, _> = apilink::text::load_threads(&fixture("training"))
        .unwrap()
        .into_iter()
        .map(|d| (d.thread_id.clone(), d))
        .collect();
    let examples = Featurizer::new(&db, PipelineConfig::default())
        .unwrap()
        .training_examples(&records, &docs)
        .unwrap();
    let model = train(&examples).unwrap();
    assert_eq!(model.to_json(), read(&fixture("model.json")).trim_end());
}
