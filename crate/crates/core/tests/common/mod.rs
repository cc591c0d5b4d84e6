#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use tweetsent::corpus::Source;
use tweetsent::embeddings::{EmbeddedSequence, EmbeddingTable};
use tweetsent::lstm::{loss, lstm_forward, Activation, LstmParams};
use tweetsent::rng::XorShift64Star;
use tweetsent::SentimentLabel;

/// Header, text column position and label strings (pos, neg, neu, [dropped...]) per source.
struct Layout {
    header: &'static str,
    labels: [&'static str; 3],
    dropped: &'static [(&'static str, usize)],
    row: fn(usize, &str, &str) -> String,
}

fn layout(source: Source) -> Layout {
    match source {
        Source::StsTest => Layout {
            header: "polarity,id,text",
            labels: ["4", "0", "2"],
            dropped: &[],
            row: |i, text, label| format!("{label},{i},{text}"),
        },
        Source::Hcr => Layout {
            header: "id,content,sentiment",
            labels: ["positive", "negative", "neutral"],
            dropped: &[("other", 45), ("irrelevant", 79)],
            row: |i, text, label| format!("{i},{text},{label}"),
        },
        Source::Omd => Layout {
            header: "content,sentiment",
            labels: ["positive", "negative", "neutral"],
            dropped: &[("other", 519)],
            row: |_, text, label| format!("{text},{label}"),
        },
        Source::SsTwitter => Layout {
            header: "text,sentiment",
            labels: ["positive", "negative", "neutral"],
            dropped: &[],
            row: |_, text, label| format!("{text},{label}"),
        },
        Source::Sanders => Layout {
            header: "Topic,Sentiment,TweetId,TweetDate,TweetText",
            labels: ["positive", "negative", "neutral"],
            dropped: &[("irrelevant", 1689)],
            row: |i, text, label| format!("apple,{label},{i},Tue Oct 18 2011,{text}"),
        },
        Source::SemEval => Layout {
            header: "id,sentiment,text",
            labels: ["positive", "negative", "neutral"],
            dropped: &[("objective", 2432)],
            row: |i, text, label| format!("{i},{label},{text}"),
        },
        Source::StsGold => Layout {
            header: "id,polarity,tweet",
            labels: ["4", "0", "2"],
            dropped: &[],
            row: |i, text, label| format!("{i},{label},{text}"),
        },
    }
}

/// Writes a CSV stand-in for `source` whose per-label row counts equal the
/// published table, with tweet-like text (quoting, handles, emoticons).
pub fn write_synthetic_dataset(dir: &Path, source: Source) -> PathBuf {
    let lay = layout(source);
    let counts = source.reference_counts();
    let mut labels: Vec<&str> = Vec::new();
    for (label, n) in lay.labels.iter().zip([counts.positive, counts.negative, counts.neutral]) {
        labels.extend(std::iter::repeat_n(*label, n as usize));
    }
    for (label, n) in lay.dropped {
        labels.extend(std::iter::repeat_n(*label, *n));
    }
    assert_eq!(labels.len() as u64, counts.input());
    let mut rng = XorShift64Star::new(source as u64 + 100);
    rng.shuffle(&mut labels);

    let mut out = String::from(lay.header);
    out.push('\n');
    for (i, label) in labels.iter().enumerate() {
        let text = match i % 4 {
            0 => format!("@user{i} loving this #day{i} :)"),
            1 => format!("\"meh, not sure\" http://t.co/{i}"),
            2 => format!("\"she said \"\"wow\"\"!!!\" {i}"),
            _ => format!("plain tweet number {i}"),
        };
        out.push_str(&(lay.row)(i, &text, label));
        out.push('\n');
    }
    let path = dir.join(format!("{}.csv", source.id()));
    fs::write(&path, out).unwrap();
    path
}

pub fn random_params(rng: &mut XorShift64Star, d: usize, h: usize, scale: f64) -> LstmParams {
    let mut p = LstmParams::zeros(d, h);
    for t in p.tensors_mut() {
        for v in t {
            *v = rng.symmetric(scale);
        }
    }
    p
}

pub fn random_sequence(rng: &mut XorShift64Star, d: usize, len: usize, max_len: usize) -> EmbeddedSequence {
    let steps: Vec<Vec<f64>> = (0..len).map(|_| (0..d).map(|_| rng.symmetric(1.0)).collect()).collect();
    EmbeddedSequence::from_steps(d, &steps, max_len)
}

/// Central finite differences of the loss with respect to every parameter,
/// in serialization order.
pub fn finite_difference_grad(
    params: &LstmParams,
    seq: &EmbeddedSequence,
    target: SentimentLabel,
    act: Activation,
    step: f64,
) -> Vec<f64> {
    let f = |p: &LstmParams| loss(&lstm_forward(p, seq, act).1.scores, target);
    let mut q = params.clone();
    let shapes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
    let mut out = Vec::new();
    for (ti, len) in shapes.into_iter().enumerate() {
        for j in 0..len {
            let orig = q.tensors()[ti][j];
            q.tensors_mut()[ti][j] = orig + step;
            let up = f(&q);
            q.tensors_mut()[ti][j] = orig - step;
            let down = f(&q);
            q.tensors_mut()[ti][j] = orig;
            out.push((up - down) / (2.0 * step));
        }
    }
    out
}

/// Relative error with a small absolute floor so that two near-zero
/// gradients compare as equal.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// True when a rectifier kink lies within `margin` of any pre-activation
/// the forward pass evaluates, where the derivative is undefined.
pub fn near_relu_kink(params: &LstmParams, seq: &EmbeddedSequence, margin: f64) -> bool {
    let (_, cache) = lstm_forward(params, seq, Activation::Relu);
    cache.steps.iter().flatten().any(|s| {
        s.gates.candidate_pre.iter().any(|z| z.abs() < margin) || s.c.iter().any(|c| c.abs() < margin)
    })
}

/// Three classes, each identified by one marker token hidden among filler.
pub fn marker_corpus(n: usize, dim: usize, seed: u64) -> (EmbeddingTable, Vec<tweetsent::LabeledTweet>) {
    let mut rng = XorShift64Star::new(seed);
    let markers = ["mark_pos", "mark_neg", "mark_neu"];
    let fillers: Vec<String> = (0..20).map(|i| format!("filler{i}")).collect();
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for m in markers {
        rows.push((m.to_string(), (0..dim).map(|_| rng.symmetric(1.0)).collect()));
    }
    for f in &fillers {
        rows.push((f.clone(), (0..dim).map(|_| rng.symmetric(1.0)).collect()));
    }
    let table = EmbeddingTable::from_rows(dim, rows).unwrap();
    let tweets = (0..n)
        .map(|i| {
            let class = i % 3;
            let len = 3 + rng.below(6);
            let mut words: Vec<&str> = (0..len).map(|_| fillers[rng.below(fillers.len())].as_str()).collect();
            let at = rng.below(len + 1);
            words.insert(at, markers[class]);
            tweetsent::LabeledTweet {
                source: None,
                text: words.join(" "),
                label: SentimentLabel::from_index(class).unwrap(),
            }
        })
        .collect();
    (table, tweets)
}
