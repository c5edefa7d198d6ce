//! Helpers shared by the acceptance suite.
#![allow(dead_code)] // each test target compiles its own copy

use faid_core::alphabet::EnsembleSpec;
use faid_core::decoder::DecoderSpec;
use faid_core::lut::{tables, Lut};
use faid_core::pmf::MessagePmf;
use faid_core::sim::code::{parse_alist_file, ParityCheckCode};
use rand::Rng;
use std::path::PathBuf;

pub fn ensemble35() -> EnsembleSpec {
    EnsembleSpec::new(3, 5).unwrap()
}

pub fn spec_for(name: &str) -> DecoderSpec {
    let lut = tables::by_name(name).expect("builtin rule");
    DecoderSpec::new(name, lut, ensemble35()).unwrap()
}

pub fn assets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

pub fn tanner_code() -> ParityCheckCode {
    parse_alist_file(&assets_dir().join("tanner155.alist")).expect("shipped code asset")
}

pub fn random_pmf(half_width: u32, rng: &mut impl Rng) -> MessagePmf {
    let n = 2 * half_width as usize + 1;
    let mut mass: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let sum: f64 = mass.iter().sum();
    for p in &mut mass {
        *p /= sum;
    }
    MessagePmf::new(half_width, mass).unwrap()
}

/// Direct min-sum over a tuple, independent of the library kernel.
pub fn min_sum_direct(msgs: &[i8]) -> i32 {
    if msgs.iter().any(|&m| m == 0) {
        return 0;
    }
    let sign = msgs.iter().fold(1i32, |s, &m| if m < 0 { -s } else { s });
    sign * msgs.iter().map(|&m| (m as i32).abs()).min().unwrap()
}

pub fn brute_cnu(q: &MessagePmf, d_c: usize) -> Vec<f64> {
    let w = q.half_width() as i32;
    let n = q.len();
    let mut out = vec![0.0; n];
    let arity = d_c - 1;
    let mut idx = vec![0usize; arity];
    loop {
        let msgs: Vec<i8> = idx.iter().map(|&i| (i as i32 - w) as i8).collect();
        let weight: f64 = idx.iter().map(|&i| q.mass()[i]).product();
        out[(min_sum_direct(&msgs) + w) as usize] += weight;
        let mut k = 0;
        while k < arity {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == arity {
            break;
        }
    }
    out
}

pub fn brute_vnu(r: &MessagePmf, alpha: f64, lut: &Lut) -> Vec<f64> {
    let w = r.half_width() as i32;
    let n = r.len();
    let mut out = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            let (la, lb) = ((a as i32 - w) as i8, (b as i32 - w) as i8);
            let weight = r.mass()[a] * r.mass()[b];
            out[(lut.lookup(la, lb, -1) as i32 + w) as usize] += alpha * weight;
            out[(lut.lookup(la, lb, 1) as i32 + w) as usize] += (1.0 - alpha) * weight;
        }
    }
    out
}

pub fn brute_app(r: &MessagePmf, alpha: f64, s_prime: i32) -> Vec<f64> {
    let w = r.half_width() as i32;
    let n = r.len();
    let mut out = vec![0.0; 2 * s_prime as usize + 1];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let sum = (a as i32 - w) + (b as i32 - w) + (c as i32 - w);
                let weight = r.mass()[a] * r.mass()[b] * r.mass()[c];
                out[(sum + 1 + s_prime) as usize] += (1.0 - alpha) * weight;
                out[(sum - 1 + s_prime) as usize] += alpha * weight;
            }
        }
    }
    out
}

pub fn max_abs_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn report(criterion: &str, pass: bool) {
    println!(
        "acceptance {criterion}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {criterion} failed");
}
