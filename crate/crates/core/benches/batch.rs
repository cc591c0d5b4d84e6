use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use tweetsent::corpus::{LabeledTweet, SentimentLabel};
use tweetsent::embeddings::EmbeddingTable;
use tweetsent::lstm::{predict_tweets, train, Activation, TrainConfig};
use tweetsent::normalize::normalize_all;
use tweetsent::rng::XorShift64Star;
use tweetsent::Execution;

const WORDS: [&str; 12] = [
    "good", "bad", "meh", "day", "the", "game", "really", "not", "love", "hate", "ok", "team",
];

fn table(dim: usize) -> EmbeddingTable {
    let mut rng = XorShift64Star::new(1);
    EmbeddingTable::from_rows(
        dim,
        WORDS.iter().map(|w| (*w, (0..dim).map(|_| rng.symmetric(1.0)).collect::<Vec<f64>>())),
    )
    .unwrap()
}

fn tweets(n: usize) -> Vec<LabeledTweet> {
    let mut rng = XorShift64Star::new(2);
    (0..n)
        .map(|_| {
            let len = 5 + rng.below(15);
            let text = (0..len).map(|_| WORDS[rng.below(WORDS.len())]).collect::<Vec<_>>().join(" ");
            LabeledTweet {
                source: None,
                text,
                label: SentimentLabel::from_index(rng.below(3)).unwrap(),
            }
        })
        .collect()
}

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn bench_train_epoch(c: &mut Criterion) {
    let table = table(50);
    let data = tweets(512);
    let mut group = c.benchmark_group("train_epoch");
    group.sample_size(10);
    for (name, exec) in modes() {
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 256,
            hidden_size: 32,
            max_len: 32,
            execution: exec,
            ..TrainConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| train(black_box(&data), cfg, &table).unwrap())
        });
    }
    group.finish();
}

fn bench_predict(c: &mut Criterion) {
    let table = table(50);
    let data = tweets(2048);
    let params = tweetsent::lstm::init_params(50, 64, 3);
    let mut group = c.benchmark_group("predict_batch");
    for (name, exec) in modes() {
        group.bench_function(name, |b| {
            b.iter(|| predict_tweets(&params, black_box(&data), &table, 32, Activation::Relu, exec))
        });
    }
    group.finish();
}

fn bench_normalize(c: &mut Criterion) {
    let raw: Vec<String> = (0..5000)
        .map(|i| format!("@user{i} this is SOOOO good!!! #tag{i} :) http://t.co/{i} really?!"))
        .collect();
    let mut group = c.benchmark_group("normalize_all");
    for (name, exec) in modes() {
        group.bench_function(name, |b| b.iter(|| normalize_all(black_box(&raw), exec)));
    }
    group.finish();
}

criterion_group!(benches, bench_train_epoch, bench_predict, bench_normalize);
criterion_main!(benches);
