//! Helpers shared by the CLI and acceptance suites.

#![allow(dead_code)]

/// Difference in units in the last place between two finite doubles.
pub fn ulps_between(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo.signum() != hi.signum() {
        return ulps_between(lo, 0.0).saturating_add(ulps_between(0.0, hi));
    }
    (hi.to_bits() as i64 - lo.to_bits() as i64).unsigned_abs()
}

/// One-sample Kolmogorov-Smirnov distance against a CDF.
pub fn ks_distance_to(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    d
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Minimal XML well-formedness check: prolog, balanced tags, quoted
/// attribute values. Enough to catch broken emitters.
pub fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = text.trim_start();
    if let Some(after) = rest.strip_prefix("<?xml") {
        let end = after.find("?>").expect("unterminated XML prolog");
        rest = &after[end + 2..];
    }
    let mut chars = rest.char_indices().peekable();
    let bytes = rest;
    while let Some((i, c)) = chars.next() {
        if c != '<' {
            continue;
        }
        let close = bytes[i..].find('>').map(|o| i + o).expect("unclosed tag");
        let inner = &bytes[i + 1..close];
        if let Some(name) = inner.strip_prefix('/') {
            let expected = stack.pop().unwrap_or_else(|| panic!("stray closing tag </{name}>"));
            assert_eq!(expected, name.trim(), "mismatched closing tag");
        } else if !inner.ends_with('/') && !inner.starts_with('!') && !inner.starts_with('?') {
            let name: String = inner.split_whitespace().next().unwrap_or("").to_string();
            assert!(!name.is_empty(), "empty tag name");
            check_attribute_quotes(inner);
            stack.push(name);
        } else if inner.ends_with('/') {
            check_attribute_quotes(&inner[..inner.len() - 1]);
        }
        while let Some(&(j, _)) = chars.peek() {
            if j <= close {
                chars.next();
            } else {
                break;
            }
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}

fn check_attribute_quotes(tag: &str) {
    let quotes = tag.chars().filter(|&c| c == '"').count();
    assert!(quotes % 2 == 0, "odd number of quotes in tag: {tag}");
}

/// Announce one acceptance criterion result.
pub fn pass(criterion: u32, what: &str) {
    println!("ACCEPTANCE {criterion} PASS: {what}");
}
