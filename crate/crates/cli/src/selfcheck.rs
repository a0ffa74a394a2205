use std::time::Instant;

use molvae_chem::{compute_properties, parse_smiles, write_smiles, PropertyTables};
use molvae_core::codec::{decode, encode, flatten, unflatten};
use molvae_core::nn::gradcheck::{check_gradients, random_case, tiny_config};
use molvae_core::nn::{kl_loss, standard_normal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{CliError, EXIT_SELFCHECK};

const MINI_CORPUS: &str = include_str!("../data/mini.smi");
const GOLDEN: &str = include_str!("../../chem/tests/data/golden_props.tsv");

type Check = fn() -> Result<String, String>;

pub fn run() -> Result<(), CliError> {
    let checks: [(&str, Check); 5] = [
        ("property tables", tables),
        ("property values", golden),
        ("gradients", gradients),
        ("codec round trip", codec),
        ("kl closed form", kl),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} checks in {:.1} s", checks.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        return Err(CliError::new(EXIT_SELFCHECK, format!("{failed} selfcheck(s) failed")));
    }
    Ok(())
}

fn tables() -> Result<String, String> {
    let t = PropertyTables::shared().map_err(|e| e.to_string())?;
    Ok(format!("{} SAS fragments", t.sas.len()))
}

fn golden() -> Result<String, String> {
    let t = PropertyTables::shared().map_err(|e| e.to_string())?;
    let mut n = 0;
    for line in GOLDEN.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let f: Vec<&str> = line.split('\t').collect();
        let want: Vec<f64> = [1, 2, 10, 11].iter().map(|&i| f[i].parse().unwrap()).collect();
        let mol = parse_smiles(f[0]).map_err(|e| format!("{}: {e}", f[0]))?;
        let p = compute_properties(&mol, t).map_err(|e| format!("{}: {e}", f[0]))?;
        let got = [p.clogp, p.cmr, p.qed, p.sas];
        for ((g, w), tol) in got.iter().zip(&want).zip([0.05, 0.05, 0.02, 0.1]) {
            if (g - w).abs() > tol {
                return Err(format!("{}: {g:.4} vs reference {w:.4}", f[0]));
            }
        }
        n += 1;
    }
    Ok(format!("{n} reference molecules within tolerance"))
}

fn gradients() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let cfg = tiny_config(k % 3);
        let mut case = random_case(&mut rng, &cfg, 3, 0.5 + k as f64 * 0.1).map_err(|e| e.to_string())?;
        let r = check_gradients(&mut case, 1e-4).map_err(|e| e.to_string())?;
        if r.max_rel_error >= 1e-4 {
            return Err(format!("network {k}, parameter {}: relative error {:.2e}", r.worst, r.max_rel_error));
        }
        worst = worst.max(r.max_rel_error);
    }
    Ok(format!("20 networks, max relative error {worst:.2e}"))
}

fn codec() -> Result<String, String> {
    let mut n = 0;
    for s in MINI_CORPUS.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mol = parse_smiles(s).map_err(|e| format!("{s}: {e}"))?;
        let g = encode(&mol).map_err(|e| format!("{s}: {e}"))?;
        let back = unflatten(&flatten(&g)).map_err(|e| format!("{s}: {e}"))?;
        if back != g {
            return Err(format!("{s}: flatten/unflatten changed the matrix"));
        }
        let m = decode(&back).map_err(|e| format!("{s}: {e}"))?;
        if write_smiles(&m) != write_smiles(&mol) {
            return Err(format!("{s}: decoded as {}", write_smiles(&m)));
        }
        n += 1;
    }
    Ok(format!("{n} molecules"))
}

fn kl() -> Result<String, String> {
    let (zero, _, _) = kl_loss(&[0.0; 4], &[0.0; 4]);
    let (half, _, _) = kl_loss(&[1.0], &[0.0]);
    if zero != 0.0 || half != 0.5 {
        return Err(format!("closed form gives {zero} and {half}, expected 0 and 0.5"));
    }
    let (mu, lv) = ([0.7, -0.3], [0.4, -0.8]);
    let (exact, _, _) = kl_loss(&mu, &lv);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 200_000;
    let eps = standard_normal(&mut rng, n, 2);
    let mut sum = 0.0;
    for r in 0..n {
        for d in 0..2 {
            let e = eps.values[2 * r + d];
            let z = mu[d] + (0.5 * lv[d]).exp() * e;
            // log q(z) − log p(z)
            sum += -0.5 * lv[d] - 0.5 * e * e + 0.5 * z * z;
        }
    }
    let mc = sum / n as f64;
    let rel = (mc - exact).abs() / exact;
    if rel > 0.02 {
        return Err(format!("closed form {exact:.5} vs Monte Carlo {mc:.5}"));
    }
    Ok(format!("closed form {exact:.5}, Monte Carlo {mc:.5}"))
}
