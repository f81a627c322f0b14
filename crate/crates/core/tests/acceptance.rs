//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::time::{Duration, Instant};

use dmgraph::bottleneck::{bottleneck_distance, log_scale};
use dmgraph::builders::{dtm_rips_filtration, lower_star_filtration, sparse_dtm_rips};
use dmgraph::cloud::dtm_weights;
use dmgraph::datagen::{self, gen_circle, gen_two_circles_with, two_circle_centers, TwoCircleLayout};
use dmgraph::oracle::{check_theorem, homology_ranks_bruteforce, random_instance};
use dmgraph::persistence::reduce_plain;
use dmgraph::recon::{
    augmented_graph, baseline, baseline_diagram, dmpcd, dmpcd_diagram, reconstruct_parts, BaselineParams,
    DmpcdParams, EdgeTags,
};
use dmgraph::{
    reduce, reconstruct, BuildOptions, Diagram, Exec, GeneratorConfig, Metric, Simplex, SkeletonGraph,
    WeightedPointCloud,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s as f64, || {
        format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn cloud_of(rows: &[Vec<f64>]) -> WeightedPointCloud {
    WeightedPointCloud::from_points(rows, Metric::L2).expect("generated rows are valid")
}

/// 1-dim persistences, largest first.
fn persistences(d: &Diagram) -> Vec<f64> {
    let mut p: Vec<f64> = d.creators(1).map(|r| r.persistence).collect();
    p.sort_by(|a, b| b.total_cmp(a));
    p
}

/// First Betti number of a graph counted directly: E - V + components.
fn graph_b1(g: &SkeletonGraph) -> usize {
    let ids: Vec<u32> = g.nodes().map(|(v, _)| v).collect();
    let mut parent: HashMap<u32, u32> = ids.iter().map(|&v| (v, v)).collect();
    fn find(p: &mut HashMap<u32, u32>, x: u32) -> u32 {
        let mut r = x;
        while p[&r] != r {
            r = p[&r];
        }
        p.insert(x, r);
        r
    }
    let mut comps = ids.len();
    let mut edges = 0;
    for (e, _) in g.edges() {
        edges += 1;
        let (a, b) = (find(&mut parent, e.vertices()[0]), find(&mut parent, e.vertices()[1]));
        if a != b {
            parent.insert(a, b);
            comps -= 1;
        }
    }
    edges + comps - ids.len()
}

/// Z2 winding parity of every fundamental cycle of `g` around `center`,
/// counted as crossings of the ray from `center` in the +x direction.
fn winding_parities(g: &SkeletonGraph, rows: &[Vec<f64>], center: [f64; 2]) -> Vec<u8> {
    let crosses = |u: u32, v: u32| -> u8 {
        let (a, b) = (&rows[u as usize], &rows[v as usize]);
        if (a[1] > center[1]) != (b[1] > center[1]) {
            let x = a[0] + (center[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            u8::from(x > center[0])
        } else {
            0
        }
    };
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut comp: HashMap<u32, u32> = HashMap::new();
    let mut chords = Vec::new();
    for (e, _) in g.edges() {
        let (u, v) = (e.vertices()[0], e.vertices()[1]);
        let (ru, rv) = (root(&mut comp, u), root(&mut comp, v));
        if ru == rv {
            chords.push((u, v));
        } else {
            comp.insert(ru, rv);
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
    }
    fn root(c: &mut HashMap<u32, u32>, x: u32) -> u32 {
        let mut r = x;
        while let Some(&p) = c.get(&r) {
            if p == r {
                break;
            }
            r = p;
        }
        c.insert(r, r);
        r
    }
    chords
        .iter()
        .map(|&(u, v)| {
            let mut prev = BTreeMap::from([(u, u)]);
            let mut queue = VecDeque::from([u]);
            while let Some(x) = queue.pop_front() {
                for &y in adj.get(&x).map_or(&[][..], Vec::as_slice) {
                    if !prev.contains_key(&y) {
                        prev.insert(y, x);
                        queue.push_back(y);
                    }
                }
            }
            let mut parity = crosses(u, v);
            let mut x = v;
            while x != u {
                let y = prev[&x];
                parity ^= crosses(x, y);
                x = y;
            }
            parity
        })
        .collect()
}

/// True when the cycle space of `g` winds independently around both centres.
fn loops_both(g: &SkeletonGraph, rows: &[Vec<f64>], centers: [[f64; 2]; 2]) -> bool {
    let a = winding_parities(g, rows, centers[0]);
    let b = winding_parities(g, rows, centers[1]);
    let kinds: BTreeSet<(u8, u8)> = a.into_iter().zip(b).filter(|&k| k != (0, 0)).collect();
    kinds.len() >= 2
}

// ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checked, mut points) = (0, 0);
    for i in 0..200 {
        let (f, delta) = random_instance(&mut rng, 10);
        let d = reduce(&f);
        let g = reconstruct(&f, &d, delta).map_err(|e| e.to_string())?;
        let report = check_theorem(&f, delta, &g).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("instance {i}:\n{report}"))?;
        ensure(graph_b1(&g) == report.expected_betti1, || {
            format!("instance {i}: counted b1 {} != {}", graph_b1(&g), report.expected_betti1)
        })?;
        checked += 1;
        points += report.records.len();
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "{checked}/200 random filtrations, {points} persistence points above delta, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut prefixes = 0;
    for i in 0..100 {
        let (f, _) = random_instance(&mut rng, 9);
        let d = reduce(&f);
        for len in 1..=f.len() {
            let brute = homology_ranks_bruteforce(&f.simplices()[..len]).map_err(|e| e.to_string())?;
            ensure(d.prefix_betti(len) == brute, || {
                format!("instance {i} prefix {len}: pairing {:?} vs ranks {brute:?}", d.prefix_betti(len))
            })?;
            prefixes += 1;
        }
        let plain = reduce_plain(&f);
        let multiset = |d: &Diagram| {
            let mut p = d.pairs();
            p.sort_unstable();
            (p, d.unpaired())
        };
        ensure(multiset(&d) == multiset(&plain), || format!("instance {i}: twist and plain pairs differ"))?;
    }
    within(start.elapsed(), 30)?;
    Ok(format!(
        "100 filtrations, {prefixes} prefixes match, twist == plain, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    for seed in 0..3 {
        let start = Instant::now();
        let rows = gen_circle(&GeneratorConfig::circle(seed)).map_err(|e| e.to_string())?;
        let cloud = cloud_of(&rows);
        let (f, d) = dmpcd_diagram(&cloud, 15, 0.99, &BuildOptions::default()).map_err(|e| e.to_string())?;
        let p = persistences(&d);
        ensure(p.len() >= 2 && p[1] > 0.0, || format!("seed {seed}: fewer than two loops"))?;
        let ratio = p[0] / p[1];
        ensure(ratio >= 5.0, || format!("seed {seed}: top/second = {ratio:.2} < 5"))?;
        for step in 0..=20 {
            let delta = p[1] + (p[0] - p[1]) * step as f64 / 21.0;
            let g = reconstruct(&f, &d, delta).map_err(|e| e.to_string())?;
            ensure(graph_b1(&g) == 1, || format!("seed {seed}: b1 = {} at delta {delta}", graph_b1(&g)))?;
        }
        within(start.elapsed(), 60)?;
        notes.push(format!(
            "seed {seed}: {} simplices, ratio {ratio:.1}, {:.1}s",
            f.len(),
            start.elapsed().as_secs_f64()
        ));
    }
    Ok(notes.join("; "))
}

fn criterion_4() -> Outcome {
    let layout = TwoCircleLayout::default();
    let centers = two_circle_centers(&layout);
    let opts = BuildOptions::default();
    let radii: Vec<f64> = (0..12).map(|i| 0.3 + 0.25 * i as f64).collect();
    let mut notes = Vec::new();
    for seed in 0..2 {
        let rows = gen_two_circles_with(&GeneratorConfig::two_circles(seed), &layout).map_err(|e| e.to_string())?;
        let cloud = cloud_of(&rows);
        let (f, d) = dmpcd_diagram(&cloud, 15, 0.99, &opts).map_err(|e| e.to_string())?;
        let p = persistences(&d);
        ensure(p.len() >= 3 && p[1] > p[2], || format!("seed {seed}: no delta gives two loops"))?;
        let delta = 0.5 * (p[1] + p[2]);
        let g = reconstruct(&f, &d, delta).map_err(|e| e.to_string())?;
        ensure(graph_b1(&g) == 2 && loops_both(&g, &rows, centers), || {
            format!("seed {seed}: DMPCD graph at delta {delta} does not loop both circles")
        })?;

        for &r in &radii {
            let (bf, bd) = baseline_diagram(&cloud, r, 15, None, &opts).map_err(|e| e.to_string())?;
            let mut deltas: Vec<f64> = bd.creators(1).map(|x| x.persistence).filter(|x| x.is_finite()).collect();
            deltas.push(0.0);
            deltas.sort_by(f64::total_cmp);
            deltas.dedup();
            for &dl in &deltas {
                let g = reconstruct(&bf, &bd, dl).map_err(|e| e.to_string())?;
                ensure(!(graph_b1(&g) == 2 && loops_both(&g, &rows, centers)), || {
                    format!("seed {seed}: baseline captures both circles at r = {r}, delta = {dl}")
                })?;
            }
        }
        notes.push(format!("seed {seed}: DMPCD delta in ({:.3}, {:.3})", p[2], p[1]));
    }
    Ok(format!("{}; baseline fails at all {} radii", notes.join("; "), radii.len()))
}

fn criterion_5() -> Outcome {
    let slack = (1.99f64).ln() + 0.05;
    let opts = BuildOptions::default();
    let mut notes = Vec::new();
    for seed in 0..2 {
        let rows = gen_circle(&GeneratorConfig {
            n_points: 200,
            ..GeneratorConfig::circle(seed)
        })
        .map_err(|e| e.to_string())?;
        let w = dtm_weights(&cloud_of(&rows), 15).map_err(|e| e.to_string())?;
        let full = dtm_rips_filtration(&w, f64::INFINITY, &opts).map_err(|e| e.to_string())?;
        let (sparse, _) = sparse_dtm_rips(&w, 0.99, &opts).map_err(|e| e.to_string())?;
        let dist = bottleneck_distance(&log_scale(&reduce(&full).points(1)), &log_scale(&reduce(&sparse).points(1)));
        ensure(dist <= slack, || format!("seed {seed}: log bottleneck {dist:.3} > {slack:.3}"))?;
        let share = sparse.len() as f64 / full.len() as f64;
        ensure(share <= 0.25, || format!("seed {seed}: sparse/full = {share:.3}"))?;
        notes.push(format!(
            "seed {seed}: log bottleneck {dist:.3} <= {slack:.3}, size {}/{} = {:.4}",
            sparse.len(),
            full.len(),
            share
        ));
    }
    Ok(notes.join("; "))
}

/// Direct reconstruction on a lower-star filtration of -density: its own sweep order,
/// its own column reduction, elder-rule roots and full tree paths.
fn lower_star_direct(complex: &[Simplex], density: &[f64], delta: f64) -> SkeletonGraph {
    let f: Vec<f64> = density.iter().map(|x| -x).collect();
    let mut verts: Vec<u32> = (0..density.len() as u32).collect();
    verts.sort_by(|&a, &b| f[a as usize].total_cmp(&f[b as usize]).then(a.cmp(&b)));
    let rank: HashMap<u32, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let top = |s: &Simplex| s.vertices().iter().map(|v| rank[v]).max().unwrap();
    let mut order: Vec<Simplex> = Vec::new();
    for &v in &verts {
        order.push(Simplex::vertex(v));
        let mut star: Vec<Simplex> = complex
            .iter()
            .filter(|s| s.dim() > 0 && top(s) == rank[&v])
            .copied()
            .collect();
        star.sort_by(|a, b| a.dim().cmp(&b.dim()).then(a.cmp(b)));
        order.extend(star);
    }
    let value = |s: &Simplex| s.vertices().iter().map(|&v| f[v as usize]).fold(f64::MIN, f64::max);
    let index: HashMap<Simplex, usize> = order.iter().enumerate().map(|(i, s)| (*s, i)).collect();

    // dense left-to-right reduction
    let mut reduced: Vec<BTreeSet<usize>> = Vec::with_capacity(order.len());
    let mut low_owner: HashMap<usize, usize> = HashMap::new();
    let mut partner: Vec<Option<usize>> = vec![None; order.len()];
    let mut negative = vec![false; order.len()];
    for j in 0..order.len() {
        let mut col: BTreeSet<usize> = match *order[j].vertices() {
            [_] => BTreeSet::new(),
            [a, b] => [index[&Simplex::vertex(a)], index[&Simplex::vertex(b)]].into(),
            [a, b, c] => [
                index[&Simplex::edge(a, b)],
                index[&Simplex::edge(a, c)],
                index[&Simplex::edge(b, c)],
            ]
            .into(),
            _ => unreachable!(),
        };
        while let Some(&low) = col.iter().next_back() {
            match low_owner.get(&low) {
                Some(&k) => col = col.symmetric_difference(&reduced[k]).copied().collect(),
                None => {
                    low_owner.insert(low, j);
                    partner[low] = Some(j);
                    partner[j] = Some(low);
                    negative[j] = true;
                    break;
                }
            }
        }
        reduced.push(col);
    }

    let pers = |i: usize| -> f64 {
        match partner[i] {
            None => f64::INFINITY,
            Some(p) if negative[i] => value(&order[i]) - value(&order[p]),
            Some(p) => value(&order[p]) - value(&order[i]),
        }
    };
    // forest of low-persistence negative edges
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (i, s) in order.iter().enumerate() {
        if s.dim() == 1 && negative[i] && pers(i) <= delta {
            let (a, b) = (s.vertices()[0], s.vertices()[1]);
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
    }
    // root each tree at its smallest -density vertex (earliest in the sweep)
    let mut parent: HashMap<u32, u32> = HashMap::new();
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    for &v in &verts {
        if seen.contains(&v) {
            continue;
        }
        let mut comp = vec![v];
        let mut queue = VecDeque::from([v]);
        seen.insert(v);
        while let Some(x) = queue.pop_front() {
            for &y in adj.get(&x).map_or(&[][..], Vec::as_slice) {
                if seen.insert(y) {
                    comp.push(y);
                    queue.push_back(y);
                }
            }
        }
        let root = *comp.iter().min_by_key(|v| rank[v]).unwrap();
        let mut queue = VecDeque::from([root]);
        let mut visited = BTreeSet::from([root]);
        while let Some(x) = queue.pop_front() {
            for &y in adj.get(&x).map_or(&[][..], Vec::as_slice) {
                if visited.insert(y) {
                    parent.insert(y, x);
                    queue.push_back(y);
                }
            }
        }
    }
    let mut g = SkeletonGraph::new();
    for (i, s) in order.iter().enumerate() {
        if s.dim() != 1 || pers(i) <= delta {
            continue;
        }
        let p = pers(i);
        let tag = if negative[i] {
            EdgeTags::CRITICAL_NEGATIVE
        } else {
            EdgeTags::CRITICAL_POSITIVE
        };
        g.insert_edge(*s, tag, p);
        for &end in s.vertices() {
            let mut x = end;
            while let Some(&y) = parent.get(&x) {
                g.insert_edge(Simplex::edge(x, y), EdgeTags::TREE_PATH, p);
                x = y;
            }
        }
    }
    g
}

fn random_complex(rng: &mut ChaCha8Rng) -> (Vec<Simplex>, Vec<f64>) {
    let n = rng.random_range(3..=12u32);
    let mut pairs: Vec<(u32, u32)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let m = rng.random_range(n as usize - 1..=pairs.len().min(3 * n as usize));
    pairs.truncate(m);
    let edges: BTreeSet<(u32, u32)> = pairs.into_iter().collect();
    let mut complex: Vec<Simplex> = (0..n).map(Simplex::vertex).collect();
    complex.extend(edges.iter().map(|&(a, b)| Simplex::edge(a, b)));
    let fill = rng.random_range(0.0..0.9);
    for &(a, b) in &edges {
        for c in b + 1..n {
            if edges.contains(&(a, c)) && edges.contains(&(b, c)) && rng.random_bool(fill) {
                complex.push(Simplex::triangle(a, b, c));
            }
        }
    }
    let ties = rng.random_bool(0.3);
    let density = (0..n)
        .map(|_| {
            if ties {
                rng.random_range(0..4) as f64
            } else {
                rng.random_range(0.0..1.0)
            }
        })
        .collect();
    (complex, density)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut edges_out = 0;
    for i in 0..50 {
        let (complex, density) = random_complex(&mut rng);
        let neg: Vec<f64> = density.iter().map(|x| -x).collect();
        let f = lower_star_filtration(&complex, &neg).map_err(|e| e.to_string())?;
        let d = reduce(&f);
        let mut finite: Vec<f64> = d.records().iter().map(|r| r.persistence).filter(|p| p.is_finite()).collect();
        finite.push(0.0);
        let delta = finite[rng.random_range(0..finite.len())];
        let general = reconstruct(&f, &d, delta).map_err(|e| e.to_string())?;
        let direct = lower_star_direct(&complex, &density, delta);
        let (a, b) = (
            general.to_json().map_err(|e| e.to_string())?,
            direct.to_json().map_err(|e| e.to_string())?,
        );
        ensure(a == b, || format!("complex {i}, delta {delta}:\ngeneral {a}\ndirect {b}"))?;
        edges_out += general.edge_count();
    }
    Ok(format!("50 complexes byte-identical ({edges_out} output edges in total)"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..500 {
        let (f, delta) = random_instance(&mut rng, 10);
        let d = reduce(&f);
        let parts = reconstruct_parts(&f, &d, delta).map_err(|e| e.to_string())?;
        // forest: no member edge closes a cycle
        let mut comp: Vec<usize> = (0..f.vertex_bound()).collect();
        fn find(c: &mut [usize], mut x: usize) -> usize {
            while c[x] != x {
                c[x] = c[c[x]];
                x = c[x];
            }
            x
        }
        for e in parts.forest.member_edges() {
            let (a, b) = (find(&mut comp, e.vertices()[0] as usize), find(&mut comp, e.vertices()[1] as usize));
            ensure(a != b, || format!("instance {i}: negative forest has a cycle through {e}"))?;
            comp[a] = b;
        }
        let hat = augmented_graph(&f, &parts);
        ensure(parts.graph.betti() == hat.betti(), || {
            format!("instance {i}: G {:?} vs G-hat {:?}", parts.graph.betti(), hat.betti())
        })?;
        let delta2 = delta + rng.random_range(0.0..1.0);
        let g2 = reconstruct(&f, &d, delta2).map_err(|e| e.to_string())?;
        let crit1: BTreeSet<Simplex> = parts.graph.critical_edges().into_iter().collect();
        ensure(g2.critical_edges().iter().all(|e| crit1.contains(e)), || {
            format!("instance {i}: critical edges not monotone in delta")
        })?;
    }
    // fixed seeds and either execution mode give identical artifacts
    for seed in 0..3 {
        let cfg = GeneratorConfig {
            n_points: 250,
            ..GeneratorConfig::two_circles(seed)
        };
        let runs: Vec<(String, String, String)> = [Exec::Serial, Exec::Parallel, Exec::Parallel]
            .into_iter()
            .map(|exec| {
                let opts = BuildOptions {
                    exec,
                    ..Default::default()
                };
                let rows = datagen::gen_two_circles(&cfg).unwrap();
                let cloud = cloud_of(&rows);
                let a = dmpcd(&cloud, DmpcdParams::default(), &opts).unwrap();
                let b = baseline(
                    &cloud,
                    BaselineParams {
                        radius: 1.5,
                        k: 15,
                        bandwidth: None,
                        delta: 0.1,
                    },
                    &opts,
                )
                .unwrap();
                (
                    dmgraph::io::points_to_csv(&rows),
                    a.graph.to_json().unwrap() + &a.diagram.to_csv(),
                    b.graph.to_json().unwrap() + &b.diagram.to_csv(),
                )
            })
            .collect();
        ensure(runs.windows(2).all(|w| w[0] == w[1]), || format!("seed {seed}: runs differ"))?;
    }
    within(start.elapsed(), 120)?;
    Ok(format!(
        "500 instances: forest acyclic, G/G-hat Betti equal, delta-monotone; pipelines deterministic; {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_8() -> Outcome {
    let period = 200.0;
    let tau = 50;
    let series = datagen::sinusoid(250, period);
    let rows = datagen::time_delay_embed(&series, 1, tau).map_err(|e| e.to_string())?;
    let cloud = cloud_of(&rows);
    let out = dmpcd(&cloud, DmpcdParams::default(), &BuildOptions::default()).map_err(|e| e.to_string())?;
    ensure(graph_b1(&out.graph) == 1, || format!("b1 = {} at delta 0.25", graph_b1(&out.graph)))?;
    let p = persistences(&out.diagram);
    ensure(!p.is_empty(), || "no 1-dim classes".into())?;
    let next = p.get(1).copied().unwrap_or(0.0);
    let g = reconstruct(&out.filtration, &out.diagram, 0.5 * (p[0] + next)).map_err(|e| e.to_string())?;
    ensure(graph_b1(&g) == 1, || "b1 != 1 in the persistence gap".into())?;
    Ok(format!("{} points, top persistence {:.3}, next {:.3}", rows.len(), p[0], next))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 theorem oracle on 200 random filtrations", criterion_1),
        ("2 persistence vs brute-force ranks, twist vs plain", criterion_2),
        ("3 circle reconstruction", criterion_3),
        ("4 two-scale recovery vs baseline sweep", criterion_4),
        ("5 sparsification quality", criterion_5),
        ("6 lower-star special case equals the direct reconstruction", criterion_6),
        ("7 structural invariants under fuzzing", criterion_7),
        ("8 time-delay embedding loop", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
