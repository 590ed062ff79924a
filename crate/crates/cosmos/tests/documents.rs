use std::path::Path;

use cosmos::doc::{
    default_catalog_sources, load_catalogs, CatalogDoc, DocError, TradeoffTableDoc, WorkflowDoc,
};
use cosmos_core::cost::function_cost;
use cosmos_core::workflow::StateBasis;
use cosmos_core::{Decimal, Money};

fn root() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn d(s: &str) -> Decimal {
    s.parse().unwrap()
}

#[test]
fn bundled_catalogs_round_trip() {
    let catalogs = load_catalogs(&default_catalog_sources().unwrap()).unwrap();
    assert_eq!(catalogs.len(), 5);
    for catalog in catalogs.iter() {
        let doc = CatalogDoc::from_catalog(catalog);
        let text = serde_json::to_string(&doc).unwrap();
        let again = CatalogDoc::parse("mem", &text)
            .unwrap()
            .to_catalog("mem")
            .unwrap();
        assert_eq!(&again, catalog);
    }
    let leo = catalogs.get("leo").unwrap();
    assert!(leo.hypothetical);
    assert_eq!(leo.components[0].rate, d("0.000049"));
}

#[test]
fn workflow_round_trip() {
    let path = root().join("workflows/deforestation.json");
    let (doc, _) = WorkflowDoc::load(&path).unwrap();
    let input = doc.to_input("deforestation").unwrap();
    assert_eq!(input.spec.functions().len(), 3);
    assert_eq!(
        input.spec.functions()[0].state_basis,
        StateBasis::PerRequest
    );
    // Factor-derived and explicit latencies.
    assert_eq!(
        input.latencies.get("retrieval", "aws-lambda-edge"),
        Some(d("125.28"))
    );
    assert_eq!(input.latencies.get("retrieval", "leo"), Some(d("69.6")));
    assert_eq!(input.latencies.get("processing", "leo"), Some(d("49")));

    let written = WorkflowDoc::from_input(&input.spec, &input.latencies, &doc.description);
    let text = serde_json::to_string_pretty(&written).unwrap();
    let again = WorkflowDoc::parse("mem", &text)
        .unwrap()
        .to_input("mem")
        .unwrap();
    assert_eq!(again, input);
}

#[test]
fn numbers_may_be_json_numbers() {
    let text = r#"{"platform_id":"x","layer":"cloud","components":[
        {"id":"inv","driver":"invocation","unit":"per_request","rate":0.2,"scale":"1M"},
        {"id":"cpu","driver":"compute","unit":"per_gb_second","rate":2.13e0,"scale":"1M"}]}"#;
    let catalog = CatalogDoc::parse("mem", text)
        .unwrap()
        .to_catalog("mem")
        .unwrap();
    assert_eq!(catalog.components[0].rate, d("0.0000002"));
    assert_eq!(catalog.components[1].rate, d("0.00000213"));
}

#[test]
fn invalid_documents_name_the_problem() {
    let cases = [
        (
            r#"{"platform_id":"x","layer":"orbit","components":[]}"#,
            "layer",
        ),
        (
            r#"{"platform_id":"x","layer":"cloud","currency":"EUR","components":[]}"#,
            "EUR",
        ),
        (
            r#"{"platform_id":"x","layer":"cloud","components":[{"id":"a","driver":"compute","unit":"per_request","rate":"1"}]}"#,
            "a",
        ),
        (
            r#"{"platform_id":"x","layer":"cloud","components":[{"id":"a","driver":"invocation","unit":"per_request","rate":"-1"}]}"#,
            "a",
        ),
        (
            r#"{"platform_id":"x","layer":"cloud","components":[],"extra":1}"#,
            "extra",
        ),
    ];
    for (text, needle) in cases {
        let err =
            CatalogDoc::parse("doc.json", text).and_then(|d| d.to_catalog("doc.json").map(|_| ()));
        let message = err.expect_err(text).to_string();
        assert!(
            message.contains(needle),
            "{message} should mention {needle}"
        );
        assert!(message.contains("doc.json"));
    }
}

#[test]
fn workflow_errors() {
    let cyclic = r#"{"workflow_id":"w","functions":[
        {"function_id":"a","n":"1","t":"0","mem":"0"},{"function_id":"b","n":"1","t":"0","mem":"0"}],
        "edges":[["a","b"],["b","a"]]}"#;
    assert!(matches!(
        WorkflowDoc::parse("w", cyclic).unwrap().to_input("w"),
        Err(DocError::Workflow { .. })
    ));
    let orphan_factor = r#"{"workflow_id":"w","functions":[{"function_id":"a","n":"1","t":"0","mem":"0"}],
        "latency":{"factors":{"leo":"0.3"}}}"#;
    assert!(WorkflowDoc::parse("w", orphan_factor)
        .unwrap()
        .to_input("w")
        .is_err());
}

#[test]
fn tradeoff_table_fixture() {
    let (doc, _) = TradeoffTableDoc::load(&root().join("fixtures/tradeoff_points.json")).unwrap();
    assert_eq!(doc.points.len(), 15);
    let problem = doc.to_problem("points", None).unwrap();
    assert_eq!(problem.cell_cost(1, 4), Money::parse("1.47029").unwrap());
    let missing = TradeoffTableDoc {
        points: doc.points[1..].to_vec(),
        ..doc.clone()
    };
    assert!(missing.to_problem("points", None).is_err());
}

#[test]
fn env_catalog_dir_overrides_bundled() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("solo.json"),
        r#"{"platform_id":"solo","layer":"cloud","components":[
            {"id":"inv","driver":"invocation","unit":"per_request","rate":"1","scale":"1M"},
            {"id":"cpu","driver":"compute","unit":"per_gb_second","rate":"1","scale":"1M"}]}"#,
    )
    .unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let sources = cosmos::doc::catalog_dir_sources(dir.path()).unwrap();
    let catalogs = load_catalogs(&sources).unwrap();
    assert_eq!(catalogs.platform_ids().collect::<Vec<_>>(), ["solo"]);
    let mut f = cosmos_core::workflow::FunctionProfile::new("f");
    f.n = d("1000000");
    assert_eq!(
        function_cost(&f, catalogs.get("solo").unwrap(), None)
            .unwrap()
            .total,
        Money::parse("1").unwrap()
    );
}
