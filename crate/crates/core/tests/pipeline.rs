//! End-to-end flows through the public API: annotate → merge → persist →
//! train → predict → persist → score, at token and phrase level, with and
//! without induced resources.

use std::collections::BTreeSet;

use marketsieve::adaptation::{brown_cluster, build_gazetteer, mix_corpora};
use marketsieve::agreement::{corpus_agreement, fleiss_kappa, merge_majority, KappaItems};
use marketsieve::corpus::{
    attach_syntax, parse_annotated, parse_conll, read_canonical, write_canonical, Corpus, Entry,
};
use marketsieve::evaluation::{bootstrap_test, evaluate, oov_decompose, BootstrapMetric};
use marketsieve::features::FeatureConfig;
use marketsieve::learning::{
    predict_binary, predict_post, train_binary, train_post_latent, LinearModel, Mode, Resources,
    TrainConfig,
};
use marketsieve::predictions::{read_predictions, write_predictions, PostPrediction};

/// One post, three annotators. The third annotator misses the product in
/// post "d2", so merging has a real disagreement to resolve.
fn annotated_corpus() -> Corpus {
    let posts: [(&str, [&str; 3]); 4] = [
        (
            "d1",
            [
                "selling {zqbot} cheap\ncontact me",
                "selling {zqbot} cheap\ncontact me",
                "selling {zqbot} cheap\ncontact me",
            ],
        ),
        (
            "d2",
            [
                "fresh {zqrat} stock\nhit me up",
                "fresh {zqrat} stock\nhit me up",
                "fresh zqrat stock\nhit me up",
            ],
        ),
        (
            "d3",
            [
                "my {zqcvv} shop\nopen all night",
                "my {zqcvv} shop\nopen all night",
                "my {zqcvv} shop\nopen all night",
            ],
        ),
        (
            "d4",
            [
                "looking for work\nno product here",
                "looking for work\nno product here",
                "looking for work\nno product here",
            ],
        ),
    ];
    let entries = posts
        .iter()
        .map(|(post_id, versions)| {
            let parsed: Vec<_> = versions
                .iter()
                .enumerate()
                .map(|(i, text)| {
                    parse_annotated("darkode", post_id, &format!("a{i}"), text).unwrap()
                })
                .collect();
            let doc = parsed[0].doc.clone();
            let layers: Vec<_> = parsed.into_iter().map(|p| p.layer).collect();
            let gold = merge_majority(&layers, &doc).unwrap();
            let mut entry = Entry::new(doc);
            entry.layers = layers;
            entry.gold = Some(gold);
            entry
        })
        .collect();
    Corpus::new(entries)
}

#[test]
fn token_pipeline_from_annotations_to_metrics() {
    let corpus = annotated_corpus();

    // the dissenting annotator is outvoted 2:1
    assert_eq!(corpus.entries[1].gold_indices(), BTreeSet::from([1]));

    // agreement is measurable and imperfect
    let kappa = fleiss_kappa(
        &corpus.entries[1].layers,
        &corpus.entries[1].doc,
        KappaItems::Eligible,
    )
    .unwrap()
    .unwrap();
    assert!(kappa < 1.0);
    let reports = corpus_agreement(&corpus, KappaItems::Eligible).unwrap();
    assert!(!reports.is_empty());

    // the corpus survives a round trip through its file format
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("train.corpus");
    write_canonical(&corpus, &corpus_path).unwrap();
    let reread = read_canonical(&corpus_path).unwrap();
    assert_eq!(reread.len(), corpus.len());
    for (a, b) in corpus.entries.iter().zip(&reread.entries) {
        assert_eq!(a.gold_indices(), b.gold_indices());
        assert_eq!(a.doc.n_tokens(), b.doc.n_tokens());
        assert_eq!(a.layers.len(), b.layers.len());
    }

    // train on the merged gold, in-sample predictions are perfect
    let model = train_binary(
        &reread,
        Mode::Token,
        FeatureConfig::default(),
        TrainConfig { l1_strength: 0.0, ..TrainConfig::default() },
        &Resources::default(),
    )
    .unwrap();

    let preds: Vec<PostPrediction> = reread
        .entries
        .iter()
        .map(|e| {
            let spans = predict_binary(&model, e, &Resources::default()).unwrap();
            PostPrediction::from_tokens(
                e.doc.post.forum_id.clone(),
                e.doc.post.post_id.clone(),
                spans.iter().map(|s| s.head).collect(),
            )
        })
        .collect();

    // predictions survive their own round trip
    let pred_path = dir.path().join("preds");
    write_predictions(&pred_path, &preds).unwrap();
    let reread_preds = read_predictions(&pred_path).unwrap();
    assert_eq!(reread_preds, preds);

    let post_preds: Vec<_> = reread_preds.iter().map(|p| p.to_post_pred()).collect();
    let report = evaluate(&reread, &post_preds).unwrap();
    assert_eq!(report.token.f1, 1.0);
    assert_eq!(report.types.f1, 1.0);
    assert_eq!(report.post_accuracy, 1.0);
    assert_eq!(report.n_posts_scored, 3); // d4 has no gold product

    // a model file reproduces the exact same predictions
    let model_path = dir.path().join("m.model");
    model.save(&model_path).unwrap();
    let loaded = LinearModel::load(&model_path).unwrap();
    for e in &reread.entries {
        assert_eq!(
            predict_binary(&loaded, e, &Resources::default()).unwrap(),
            predict_binary(&model, e, &Resources::default()).unwrap()
        );
    }

    // a system compared against itself shows no advantage
    let p = bootstrap_test(
        BootstrapMetric::TokenF1,
        &reread,
        &post_preds,
        &post_preds,
        200,
        7,
    )
    .unwrap();
    assert_eq!(p, 1.0);
}

#[test]
fn phrase_pipeline_with_parses() {
    // title: "market post" / body: "selling fresh zqbot installs today"
    let texts = [
        ("p1", "market post\nselling fresh {zqbot} installs today"),
        ("p2", "market post\nselling fresh {zqrat} services today"),
    ];
    let conll = "1\tmarket\tmarket\tNN\tNN\t_\t2\tnn\t_\t_\n\
                 2\tpost\tpost\tNN\tNN\t_\t0\troot\t_\t_\n\
                 \n\
                 1\tselling\tsell\tVBG\tVBG\t_\t0\troot\t_\t_\n\
                 2\tfresh\tfresh\tJJ\tJJ\t_\t3\tamod\t_\t_\n\
                 3\tPRODUCT\tPRODUCT\tNN\tNN\t_\t4\tnn\t_\t_\n\
                 4\tOBJECT\tOBJECT\tNNS\tNNS\t_\t1\tdobj\t_\t_\n\
                 5\ttoday\ttoday\tNN\tNN\t_\t1\ttmod\t_\t_\n";

    let entries: Vec<Entry> = texts
        .iter()
        .map(|(post_id, text)| {
            let parsed = parse_annotated("darkode", post_id, "a0", text).unwrap();
            let product = parsed.doc.token(4).text.clone();
            let object = parsed.doc.token(5).text.clone();
            let this_conll = conll.replace("PRODUCT", &product).replace("OBJECT", &object);
            let sentences = parse_conll(&this_conll, "inline").unwrap();
            let doc = attach_syntax(parsed.doc, &sentences).unwrap();
            let mut e = Entry::new(doc);
            e.gold = Some(parsed.layer);
            e
        })
        .collect();
    let corpus = Corpus::new(entries);

    let model = train_binary(
        &corpus,
        Mode::Np,
        FeatureConfig::default(),
        TrainConfig { l1_strength: 0.0, ..TrainConfig::default() },
        &Resources::default(),
    )
    .unwrap();

    // the gold token projects to the NP it heads... its parent "installs"
    // heads the full object NP, so prediction lands on a phrase, and
    // span-level containment holds for the annotated token.
    let spans = predict_binary(&model, &corpus.entries[0], &Resources::default()).unwrap();
    assert!(!spans.is_empty());
    let gold_head = *corpus.entries[0].gold_indices().iter().next().unwrap();
    assert!(
        spans.iter().any(|s| s.head == gold_head),
        "a predicted phrase must be headed by the annotated token"
    );
    for s in &spans {
        assert!(s.end - s.start <= 7, "phrases stay within the length cap");
    }

    // post-level phrase model on the same corpus
    let post_model = train_post_latent(
        &corpus,
        Mode::PostNp,
        FeatureConfig::default(),
        TrainConfig { l1_strength: 0.0, ..TrainConfig::default() },
        &Resources::default(),
    )
    .unwrap();
    for e in &corpus.entries {
        let pick = predict_post(&post_model, e, &Resources::default()).unwrap().unwrap();
        assert!(e.gold_indices().contains(&pick.head));
    }
}

#[test]
fn cross_domain_mixing_with_induced_resources() {
    let source_texts = [
        "selling {bots} cheap",
        "my {bots} are fresh",
        "cheap {rats} available",
        "quality {rats} here",
        "selling {installs} now",
        "buy my {installs} today",
    ];
    let target_texts = ["need {spam} tool", "selling {spam} list"];
    let eval_texts = ["quality {spam} here", "selling {bots} again"];

    let build = |forum: &str, texts: &[&str]| {
        Corpus::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let parsed =
                        parse_annotated(forum, &format!("{forum}{i}"), "a0", t).unwrap();
                    let mut e = Entry::new(parsed.doc);
                    e.gold = Some(parsed.layer);
                    e
                })
                .collect(),
        )
    };
    let source = build("alpha", &source_texts);
    let target = build("beta", &target_texts);
    let eval_corpus = build("beta", &eval_texts);

    // induced resources from source-domain data
    let hierarchy = brown_cluster(&source.lowercased_sentences(), 6, 1).unwrap();
    assert!(!hierarchy.is_empty());
    let gazetteer = build_gazetteer(&source, 2);
    assert!(gazetteer.len() >= 2); // bots, rats, installs stems seen >= 2 times

    let mixed = mix_corpora(&source, &target, 5.0).unwrap();
    assert_eq!(mixed.len(), source.len() + target.len());
    assert!(mixed.entries.iter().any(|e| e.weight == 5.0));

    let res = Resources { brown: Some(&hierarchy), gazetteer: Some(&gazetteer) };
    let features = FeatureConfig {
        use_brown: true,
        use_gazetteer: true,
        domain_augment: true,
        ..FeatureConfig::default()
    };
    let train = || {
        train_binary(
            &mixed,
            Mode::Token,
            features.clone(),
            TrainConfig { l1_strength: 0.0, ..TrainConfig::default() },
            &res,
        )
        .unwrap()
    };
    let model = train();
    // mixing, augmentation, and induced resources stay deterministic
    assert_eq!(model.weights, train().weights);

    let preds: Vec<_> = eval_corpus
        .entries
        .iter()
        .map(|e| {
            let spans = predict_binary(&model, e, &res).unwrap();
            marketsieve::evaluation::PostPred::from_tokens(
                spans.iter().map(|s| s.head).collect(),
            )
        })
        .collect();
    let report = evaluate(&eval_corpus, &preds).unwrap();
    assert!(report.token.recall > 0.0, "in-vocabulary products must be found");

    let oov = oov_decompose(&mixed, &eval_corpus, &preds).unwrap();
    // both eval golds ("spam", "bots") occur in the mixed training gold
    assert_eq!(oov.oov_rate, 0.0);
}
