//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::thread;
use std::time::{Duration, Instant};

use common::{binomial, random_grid_instance, random_instance, Instance};
use fpm_core::channel::Channel;
use fpm_core::domain::{oracle_intersection, Word};
use fpm_core::encpoly::{enc_poly, eval_encrypted, Polynomial};
use fpm_core::homcrypt::{keygen, keygen_with_capacity, Backend, KeyPair, RingElement, TEST_MODULUS_BITS};
use fpm_core::lss::{add_sharewise, reconstruct, share, SharingParams};
use fpm_core::protocols::hamming::{equality_matrix_client, equality_matrix_server};
use fpm_core::protocols::{
    attack_demo, run_local, run_tcp, ClientOutcome, EqmVersion, ProtocolKind, SessionConfig,
};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;

/// Words output outside the oracle, over every fixed-protocol run.
#[derive(Default)]
struct Soundness {
    runs: u64,
    violations: u64,
}

impl Soundness {
    fn record(&mut self, out: &ClientOutcome, oracle: &BTreeSet<Word>) {
        self.runs += 1;
        self.violations += out.matched.difference(oracle).count() as u64;
        self.violations += out.learned.difference(oracle).count() as u64;
    }
}

#[derive(Clone, Copy)]
struct Variant {
    label: &'static str,
    protocol: ProtocolKind,
    eqm: EqmVersion,
}

const VARIANTS: [Variant; 5] = [
    Variant { label: "polynomial", protocol: ProtocolKind::Polynomial, eqm: EqmVersion::V1 },
    Variant { label: "simple-ss", protocol: ProtocolKind::SimpleSs, eqm: EqmVersion::V1 },
    Variant { label: "improved-ss", protocol: ProtocolKind::ImprovedSs, eqm: EqmVersion::V1 },
    Variant { label: "hamming-v1", protocol: ProtocolKind::Hamming, eqm: EqmVersion::V1 },
    Variant { label: "hamming-v2", protocol: ProtocolKind::Hamming, eqm: EqmVersion::V2 },
];

fn config(v: Variant, inst: &Instance, seed: u64) -> SessionConfig {
    let mut cfg = SessionConfig::new(v.protocol, inst.word_len, inst.threshold, inst.domain_size)
        .with_seed(seed);
    cfg.eqm = v.eqm;
    cfg
}

/// Closed-form message counts; `None` when they hold.
fn count_mismatch(v: Variant, inst: &Instance, out: &ClientOutcome) -> Option<String> {
    let (n_c, n_s) = (inst.client.len() as u64, inst.server.len() as u64);
    let (bt, t, d) = (inst.word_len as u64, inst.threshold as u64, u64::from(inst.domain_size));
    let comb = binomial(inst.word_len, inst.threshold);
    let s = &out.stats;
    let want = match (v.protocol, v.eqm) {
        (ProtocolKind::Polynomial, _) => [comb * (n_c + 1), comb * n_s, 0, 0, 0],
        (ProtocolKind::SimpleSs, _) => [n_c * bt, n_c * n_s * bt, 0, n_c * n_s, 0],
        (ProtocolKind::ImprovedSs, _) => [
            n_c * bt,
            bt * (n_s + 1),
            (n_s + n_c) * (bt + 1 - t) + n_c * bt,
            n_s,
            0,
        ],
        (ProtocolKind::Hamming, EqmVersion::V1) => [n_c * bt * d, n_c * n_s * (bt - t + 1), 0, 0, 0],
        (ProtocolKind::Hamming, EqmVersion::V2) => [
            2 * n_c * n_s * bt,
            n_c * n_s * (bt - t + 1) + n_c * n_s * bt * d,
            0,
            0,
            n_c * n_s * bt,
        ],
        (ProtocolKind::Original, _) => unreachable!(),
    };
    let got = [
        s.ciphertexts_c2s,
        s.ciphertexts_s2c,
        s.clear_ring_values,
        s.sealed_blobs,
        s.ot_invocations,
    ];
    (got != want).then(|| format!("{} counts {got:?}, expected {want:?}", v.label))
}

struct GridResults {
    missing: u64,
    extra: u64,
    failures: Vec<String>,
    count_failures: Vec<String>,
    search_failures: Vec<String>,
    runs: u64,
    elapsed: Duration,
}

fn run_grid(soundness: &mut Soundness) -> GridResults {
    let start = Instant::now();
    let mut r = GridResults {
        missing: 0,
        extra: 0,
        failures: vec![],
        count_failures: vec![],
        search_failures: vec![],
        runs: 0,
        elapsed: Duration::ZERO,
    };
    for v in VARIANTS {
        for seed in 0..500u64 {
            let inst = random_grid_instance(seed);
            let oracle = oracle_intersection(&inst.client, &inst.server, inst.threshold).unwrap();
            let out = match run_local(&config(v, &inst, seed), &inst.client, &inst.server) {
                Ok(out) => out,
                Err(e) => {
                    r.failures.push(format!("{} seed {seed}: {e}", v.label));
                    continue;
                }
            };
            r.runs += 1;
            soundness.record(&out, &oracle);
            r.missing += oracle.difference(&out.matched).count() as u64;
            r.extra += out.matched.difference(&oracle).count() as u64;
            if let Some(m) = count_mismatch(v, &inst, &out) {
                r.count_failures.push(format!("seed {seed}: {m}"));
            }
            if v.protocol == ProtocolKind::ImprovedSs {
                let bound = (inst.client.len() * inst.server.len()) as u64
                    * binomial(inst.word_len, inst.threshold);
                if out.reconstructions > bound {
                    r.search_failures
                        .push(format!("seed {seed}: {} > {bound}", out.reconstructions));
                }
            }
        }
    }
    r.elapsed = start.elapsed();
    r
}

fn criterion_1(grid: &GridResults) -> Outcome {
    let detail = format!(
        "{} runs over 5 variants, {} missing, {} extra, {:.1} s",
        grid.runs,
        grid.missing,
        grid.extra,
        grid.elapsed.as_secs_f64()
    );
    if !grid.failures.is_empty() {
        return Err(format!("{detail}; errors: {:?}", &grid.failures[..grid.failures.len().min(3)]));
    }
    if grid.missing > 0 || grid.extra > 0 || grid.runs != 2500 {
        return Err(detail);
    }
    if grid.elapsed > Duration::from_secs(120) {
        return Err(format!("{detail}; over the 120 s budget"));
    }
    Ok(detail)
}

fn criterion_2(soundness: &mut Soundness) -> Outcome {
    let start = Instant::now();
    let report = attack_demo(2, false, 1).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !report.oracle.is_empty() {
        return Err("oracle is not empty on the counterexample".into());
    }
    let leak = Word::new(vec![5, 4, 3]);
    let original = report.rows.iter().find(|r| r.protocol == ProtocolKind::Original);
    let leaked = original
        .and_then(|r| r.output.as_ref())
        .is_some_and(|o| o.contains(&leak));
    for row in report.rows.iter().filter(|r| r.protocol != ProtocolKind::Original) {
        if let Some(out) = &row.output {
            soundness.runs += 1;
            soundness.violations += out.difference(&report.oracle).count() as u64;
        }
    }
    let fixed_ok = report.fixed_match_oracle();
    let detail = format!(
        "original outputs [5,4,3]: {leaked}; fixed protocols output nothing: {fixed_ok}; {:.3} s",
        elapsed.as_secs_f64()
    );
    if leaked && fixed_ok && elapsed < Duration::from_secs(1) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3(grid: &GridResults) -> Outcome {
    if !grid.count_failures.is_empty() {
        return Err(format!(
            "{} count mismatches, e.g. {}",
            grid.count_failures.len(),
            grid.count_failures[0]
        ));
    }
    // Improved-ss total ciphertexts must be affine in n at fixed T.
    let big_t = 4;
    let mut totals = Vec::new();
    for n in [2usize, 4, 8] {
        let inst = random_instance(n as u64, n, n, big_t, 2, 16);
        let v = VARIANTS[2];
        let out = run_local(&config(v, &inst, 3), &inst.client, &inst.server).map_err(|e| e.to_string())?;
        if out.stats.ciphertexts_s2c != (big_t * (n + 1)) as u64 {
            return Err(format!("improved-ss s2c at n={n}: {}", out.stats.ciphertexts_s2c));
        }
        totals.push(out.stats.ciphertexts_total());
    }
    let affine = totals[2] - totals[1] == 2 * (totals[1] - totals[0]);
    let detail = format!(
        "{} runs match closed forms; improved-ss totals at n=2,4,8: {:?} (affine: {affine})",
        grid.runs, totals
    );
    if affine {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4(grid: &GridResults, soundness: &mut Soundness) -> Outcome {
    if !grid.search_failures.is_empty() {
        return Err(format!("bound exceeded: {}", grid.search_failures[0]));
    }
    let mut exact = 0;
    let mut rng = ChaCha20Rng::seed_from_u64(44);
    for seed in 0..20u64 {
        let (n_c, n_s) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let big_t = rng.gen_range(2..=5);
        let t = rng.gen_range(1..=big_t);
        // Client letters from the lower half, server letters from the upper
        // half: no position ever agrees.
        let client: Vec<Word> = (0..n_c)
            .map(|_| Word::new((0..big_t).map(|_| rng.gen_range(0..8)).collect()))
            .collect();
        let server: Vec<Word> = (0..n_s)
            .map(|_| Word::new((0..big_t).map(|_| rng.gen_range(8..16)).collect()))
            .collect();
        let mut cfg = SessionConfig::new(ProtocolKind::ImprovedSs, big_t, t, 16).with_seed(seed);
        cfg.early_exit = false;
        let out = run_local(&cfg, &client, &server).map_err(|e| e.to_string())?;
        soundness.record(&out, &BTreeSet::new());
        let bound = (n_c * n_s) as u64 * binomial(big_t, t);
        if out.reconstructions != bound || !out.matched.is_empty() {
            return Err(format!("seed {seed}: {} attempts, bound {bound}", out.reconstructions));
        }
        exact += 1;
    }
    Ok(format!(
        "bound held on all improved-ss grid runs; equality on {exact}/20 all-mismatch runs without early exit"
    ))
}

fn homomorphic_suite(kp: &KeyPair, rng: &mut ChaCha20Rng, triples: usize) -> Result<(), String> {
    let (pk, sk) = (&kp.public, &kp.secret);
    let ring = pk.ring().clone();
    for _ in 0..triples {
        let (a, b, s) = (ring.random(rng), ring.random(rng), ring.random(rng));
        let (ca, cb) = (pk.encrypt(&a, rng), pk.encrypt(&b, rng));
        let dec = |c| sk.decrypt(&c).map_err(|e| e.to_string());
        if dec(pk.add(&ca, &cb).map_err(|e| e.to_string())?)? != ring.add(&a, &b)
            || dec(pk.sub(&ca, &cb).map_err(|e| e.to_string())?)? != ring.sub(&a, &b)
            || dec(pk.scalar_mul(&ca, &s).map_err(|e| e.to_string())?)? != ring.mul(&a, &s)
        {
            return Err(format!("{} identity failed", pk.backend()));
        }
    }
    Ok(())
}

fn encpoly_suite(kp: &KeyPair, rng: &mut ChaCha20Rng) -> Result<(), String> {
    let ring = kp.public.ring().clone();
    for _ in 0..100 {
        let degree = rng.gen_range(0..=8);
        let coeffs: Vec<RingElement> = (0..=degree).map(|_| ring.random(rng)).collect();
        let p = Polynomial::new(coeffs.clone()).map_err(|e| e.to_string())?;
        let x = ring.random(rng);
        let ep = enc_poly(&kp.public, &p, rng);
        let c = eval_encrypted(&kp.public, &ep, &x).map_err(|e| e.to_string())?;
        let got = kp.secret.decrypt(&c).map_err(|e| e.to_string())?;
        let want = coeffs.iter().enumerate().fold(ring.zero(), |acc, (i, a)| {
            ring.add(&acc, &ring.mul(a, &ring.pow(&x, i as u64)))
        });
        if got != want {
            return Err(format!("{} encrypted evaluation mismatch", kp.public.backend()));
        }
    }
    Ok(())
}

fn lss_suite(rng: &mut ChaCha20Rng) -> Result<(), String> {
    let ring = fpm_core::homcrypt::Ring::new(fpm_core::homcrypt::mersenne(127)).unwrap();
    for m in 1..=8usize {
        for d in 1..=m {
            let params = SharingParams::new(d, m).unwrap();
            let secret = ring.random(rng);
            let other = ring.random(rng);
            let shares = share(&ring, &secret, params, &[], rng).map_err(|e| e.to_string())?;
            let more = share(&ring, &other, params, &[], rng).map_err(|e| e.to_string())?;
            for subset in shares.iter().cloned().combinations(d) {
                if reconstruct(&ring, &subset, params).map_err(|e| e.to_string())? != secret {
                    return Err(format!("reconstruction failed for d={d}, m={m}"));
                }
            }
            let sum = add_sharewise(&ring, &shares, &more).map_err(|e| e.to_string())?;
            if reconstruct(&ring, &sum[m - d..], params).map_err(|e| e.to_string())?
                != ring.add(&secret, &other)
            {
                return Err("linearity failed".into());
            }
            if d > 1 {
                let fixed: Vec<_> = (1..d as u16).map(|i| (i, ring.random(rng))).collect();
                let pinned = share(&ring, &secret, params, &fixed, rng).map_err(|e| e.to_string())?;
                let honoured = fixed.iter().all(|(i, v)| &pinned[*i as usize - 1].value == v);
                let rec = reconstruct(&ring, &pinned[m - d..], params).map_err(|e| e.to_string())?;
                if !honoured || rec != secret {
                    return Err(format!("constrained sharing failed for d={d}, m={m}"));
                }
            }
        }
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(55);
    let mock = keygen_with_capacity(200, Backend::Mock, 0, &mut rng).map_err(|e| e.to_string())?;
    homomorphic_suite(&mock, &mut rng, 1000)?;
    encpoly_suite(&mock, &mut rng)?;
    lss_suite(&mut rng)?;

    let start = Instant::now();
    let real = keygen_with_capacity(200, Backend::Paillier, TEST_MODULUS_BITS, &mut rng)
        .map_err(|e| e.to_string())?;
    homomorphic_suite(&real, &mut rng, 1000)?;
    encpoly_suite(&real, &mut rng)?;
    let elapsed = start.elapsed();
    let detail = format!(
        "1000 triples per backend, LSS m<=8, 100 encrypted polynomials; Paillier-{TEST_MODULUS_BITS} profile {:.1} s",
        elapsed.as_secs_f64()
    );
    if elapsed < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(format!("{detail}; over the 60 s budget"))
    }
}

fn criterion_6(soundness: &mut Soundness) -> Outcome {
    let inst = random_instance(66, 4, 4, 4, 2, 16);
    let oracle = oracle_intersection(&inst.client, &inst.server, 2).unwrap();
    let cfg = SessionConfig::new(ProtocolKind::ImprovedSs, 4, 2, 16)
        .with_backend(Backend::Paillier, 2048)
        .with_seed(6);
    let start = Instant::now();
    let out = run_tcp(&cfg, &inst.client, &inst.server).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    soundness.record(&out, &oracle);
    let detail = format!(
        "improved-ss, Paillier-2048, n=4 T=4 t=2 k=64 over tcp: {} of {} matches, {:.1} s",
        out.matched.len(),
        oracle.len(),
        elapsed.as_secs_f64()
    );
    if out.matched == oracle && elapsed < Duration::from_secs(30) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Decrypted equality matrix from one run of the subroutine.
fn decrypted_matrix(version: EqmVersion, inst: &Instance, seed: u64) -> Result<Vec<u64>, String> {
    let params = fpm_core::domain::FuzzyParams::new(
        inst.client.len(),
        inst.server.len(),
        inst.word_len,
        inst.threshold,
        inst.domain_size,
        64,
    )
    .map_err(|e| e.to_string())?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keys = keygen(&params, Backend::Mock, 0, &mut rng).map_err(|e| e.to_string())?;
    let (mut c, mut s) = Channel::local_pair(ProtocolKind::Hamming.id());
    let pk = keys.public.clone();
    let server = inst.server.clone();
    let h = thread::spawn(move || {
        let mut rng = ChaCha20Rng::seed_from_u64(seed + 1);
        equality_matrix_server(&mut s, version, &pk, &server, &params, Backend::Mock, 0, &mut rng)
    });
    equality_matrix_client(&mut c, version, &keys.public, &inst.client, &params, &mut rng)
        .map_err(|e| e.to_string())?;
    let matrix = h.join().unwrap().map_err(|e| e.to_string())?;
    let mut flat = Vec::new();
    for row in &matrix {
        for cell in row {
            for c in cell {
                let v = keys.secret.decrypt(c).map_err(|e| e.to_string())?;
                flat.push(u64::try_from(v.value()).map_err(|_| "indicator out of range")?);
            }
        }
    }
    Ok(flat)
}

fn criterion_7(soundness: &mut Soundness) -> Outcome {
    for seed in 0..100u64 {
        let inst = random_grid_instance(10_000 + seed);
        let plain: Vec<u64> = inst
            .client
            .iter()
            .flat_map(|x| {
                inst.server.iter().flat_map(move |y| {
                    x.letters().iter().zip(y.letters()).map(|(a, b)| u64::from(a == b))
                })
            })
            .collect();
        let v1 = decrypted_matrix(EqmVersion::V1, &inst, seed)?;
        let v2 = decrypted_matrix(EqmVersion::V2, &inst, seed)?;
        if v1 != plain || v2 != plain {
            return Err(format!("seed {seed}: decrypted matrices differ from plaintext"));
        }
        let oracle = oracle_intersection(&inst.client, &inst.server, inst.threshold).unwrap();
        let a = run_local(&config(VARIANTS[3], &inst, seed), &inst.client, &inst.server)
            .map_err(|e| e.to_string())?;
        let b = run_local(&config(VARIANTS[4], &inst, seed), &inst.client, &inst.server)
            .map_err(|e| e.to_string())?;
        soundness.record(&a, &oracle);
        soundness.record(&b, &oracle);
        if a.matched != b.matched {
            return Err(format!("seed {seed}: hamming-v1 and hamming-v2 outputs differ"));
        }
    }
    Ok("100 instances: v1 and v2 matrices equal the plaintext matrix; outputs agree".into())
}

fn criterion_8(soundness: &Soundness) -> Outcome {
    let detail = format!(
        "{} fixed-protocol runs, {} words output outside the oracle",
        soundness.runs, soundness.violations
    );
    if soundness.violations == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let mut soundness = Soundness::default();
    let grid = run_grid(&mut soundness);
    let results = [
        ("1", "oracle equivalence", criterion_1(&grid)),
        ("2", "attack reproduction", criterion_2(&mut soundness)),
        ("3", "exact message counts", criterion_3(&grid)),
        ("4", "reconstruction-search bound", criterion_4(&grid, &mut soundness)),
        ("5", "primitive suites", criterion_5()),
        ("6", "real-crypto end-to-end", criterion_6(&mut soundness)),
        ("7", "equality-matrix agreement", criterion_7(&mut soundness)),
    ];
    let eighth = criterion_8(&soundness);
    let mut failed = 0;
    for (id, name, outcome) in results.iter().chain(std::iter::once(&("8", "soundness", eighth))) {
        match outcome {
            Ok(detail) => println!("acceptance {id} PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("acceptance {id} FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
