mod common;

use std::collections::BTreeSet;

use common::{fixture, random_linear, random_rank2, random_relabel, FIXTURES};
use fbc_core::classify::{classify_strata, compute_filtration, transition_matrix, Growth};
use fbc_core::decompose::build_delta;
use fbc_core::delta::{parse_delta, CENTRAL};
use fbc_core::nielsen::{analyze, fix_basis, is_nielsen_path, nielsen_cycle_classes};
use fbc_core::torus::{MappingTorus, TorusElement};
use fbc_core::verdict::{decide, decide_detailed, excessive_linearity};
use fbc_core::{parse_graph_map, CyclicWord, Dart, EdgePath, GraphMap, MarkedGraph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A walk from the basepoint that picks outgoing darts by index, with no
/// attempt to avoid backtracking.
fn walk(g: &MarkedGraph, choices: &[usize]) -> EdgePath {
    let mut at = g.basepoint();
    let mut darts: Vec<Dart> = Vec::new();
    for &c in choices {
        let out = g.outgoing(at);
        let d = out[c % out.len()];
        darts.push(d);
        at = g.term(d);
    }
    EdgePath::with_start(g, g.basepoint(), darts).unwrap()
}

/// A walk from the basepoint closed up through the spanning tree.
fn loop_walk(g: &MarkedGraph, choices: &[usize]) -> EdgePath {
    let p = walk(g, choices);
    let tree = g.spanning_tree(g.basepoint());
    let mut darts = p.darts().to_vec();
    let mut at = p.end(g);
    while at != g.basepoint() {
        let d = tree[at.index()].expect("tree reaches every vertex");
        darts.push(d.inv());
        at = g.init(d);
    }
    EdgePath::with_start(g, g.basepoint(), darts).unwrap()
}

fn fixture_strategy() -> impl Strategy<Value = &'static str> {
    proptest::sample::select(FIXTURES.to_vec())
}

fn relabel_name(prefix: &str, n: &str) -> String {
    format!("{prefix}{n}")
}

/// All excessive classes of a decision, as sets of edge and vertex names.
fn excessive_sets(f: &GraphMap) -> BTreeSet<(Vec<String>, Vec<String>)> {
    decide_detailed(f)
        .unwrap()
        .components
        .iter()
        .flat_map(|c| c.excessive.iter())
        .map(|(_, w)| {
            let mut e = w.edges.clone();
            let mut t = w.vertices.clone();
            e.sort();
            t.sort();
            (e, t)
        })
        .collect()
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tighten_is_idempotent_and_shortens(name in fixture_strategy(), choices in proptest::collection::vec(0usize..8, 0..30)) {
        let f = fixture(name);
        let p = walk(f.graph(), &choices);
        let t = p.tighten();
        prop_assert!(t.is_reduced());
        prop_assert!(t.len() <= p.len());
        prop_assert_eq!(t.tighten(), t.clone());
        prop_assert_eq!(t.start(), p.start());
        prop_assert_eq!(t.end(f.graph()), p.end(f.graph()));
    }

    #[test]
    fn map_path_is_well_defined(name in fixture_strategy(), choices in proptest::collection::vec(0usize..8, 0..20)) {
        let f = fixture(name);
        let p = walk(f.graph(), &choices);
        prop_assert_eq!(f.map_path(&p.tighten()), f.map_path_raw(&p).tighten());
    }

    #[test]
    fn map_path_is_functorial(name in fixture_strategy(), a in proptest::collection::vec(0usize..8, 0..12), b in proptest::collection::vec(0usize..8, 0..12)) {
        let f = fixture(name);
        let g = f.graph();
        let p = loop_walk(g, &a);
        let q = loop_walk(g, &b);
        let pq = p.concat(g, &q).unwrap();
        let lhs = f.map_path(&pq);
        let rhs = f.map_path(&p).concat(g, &f.map_path(&q)).unwrap().tighten();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn torus_group_laws(name in fixture_strategy(),
                        words in proptest::collection::vec(proptest::collection::vec(0usize..8, 0..6), 3),
                        exps in proptest::collection::vec(-3i64..=3, 3)) {
        let f = fixture(name);
        let g = f.graph();
        let m = MappingTorus::new(&f).unwrap();
        let els: Vec<TorusElement> = words
            .iter()
            .zip(&exps)
            .map(|(w, &k)| TorusElement { word: loop_walk(g, w).tighten(), t_exp: k })
            .collect();
        let (x, y, z) = (&els[0], &els[1], &els[2]);
        let e = TorusElement::identity(g);
        let left = m.mul(&m.mul(x, y).unwrap(), z).unwrap();
        let right = m.mul(x, &m.mul(y, z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(m.mul(&e, x).unwrap(), x.clone());
        prop_assert_eq!(m.mul(x, &e).unwrap(), x.clone());
        let inv = m.inverse(x).unwrap();
        prop_assert_eq!(m.mul(x, &inv).unwrap(), e.clone());
        prop_assert_eq!(m.mul(&inv, x).unwrap(), e);
    }

    #[test]
    fn primitive_root_composes(choices in proptest::collection::vec(0usize..6, 1..8), n in 1usize..4) {
        let f = fixture("gersten");
        let g = f.graph();
        let p = walk(g, &choices).tighten();
        prop_assume!(!p.is_empty() && p.is_cyclically_reduced());
        let w = CyclicWord::from_path(g, &p).unwrap();
        let (v, m) = w.primitive_root();
        prop_assert_eq!(v.power(m), w.clone());
        let (v2, m2) = w.power(n).primitive_root();
        prop_assert_eq!(v2, v);
        prop_assert_eq!(m2, n * m);
    }

    #[test]
    fn nielsen_paths_compose(name in fixture_strategy(), picks in proptest::collection::vec((0usize..16, any::<bool>()), 1..5)) {
        let f = fixture(name);
        prop_assume!(classify_strata(&f).map(|r| !r.has_eg()).unwrap_or(false));
        let g = f.graph();
        let a = analyze(&f).unwrap();
        let basis = fix_basis(&f, &a, g.basepoint());
        prop_assume!(!basis.is_empty());
        let mut acc = EdgePath::empty(g.basepoint());
        for (i, invert) in picks {
            let b = &basis[i % basis.len()];
            prop_assert!(is_nielsen_path(&f, b));
            let b = if invert { b.reverse(g) } else { b.clone() };
            acc = acc.concat(g, &b).unwrap().tighten();
            prop_assert!(is_nielsen_path(&f, &acc));
        }
    }

    #[test]
    fn relabelling_preserves_growth_and_verdict(name in fixture_strategy(), seed in any::<u64>()) {
        let f = fixture(name);
        let h = random_relabel(&f, &mut seeded(seed));
        let rf = classify_strata(&f).unwrap();
        let rh = classify_strata(&h).unwrap();
        prop_assert_eq!(rf.overall, rh.overall);
        for e in f.graph().edges() {
            let new = h.graph().edge_id(&relabel_name("E", f.graph().edge_name(e))).unwrap();
            prop_assert_eq!(rf.degree(e), rh.degree(new));
        }
        let vf = decide(&f).unwrap();
        let vh = decide(&h).unwrap();
        prop_assert_eq!((vf.hhg, vf.growth, vf.rank, &vf.caveats), (vh.hhg, vh.growth, vh.rank, &vh.caveats));
        let renamed: BTreeSet<(Vec<String>, Vec<String>)> = excessive_sets(&f)
            .into_iter()
            .map(|(e, t)| {
                let mut e: Vec<String> = e.iter().map(|n| relabel_name("E", n)).collect();
                let mut t: Vec<String> = t.iter().map(|n| relabel_name("V", n)).collect();
                e.sort();
                t.sort();
                (e, t)
            })
            .collect();
        prop_assert_eq!(renamed, excessive_sets(&h));
    }

    #[test]
    fn relabelling_preserves_delta_shape(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let f = random_linear(&mut rng);
        let h = random_relabel(&f, &mut rng);
        let shape = |f: &GraphMap| {
            let d = build_delta(f, &analyze(f).unwrap()).delta;
            let mut vals: Vec<(usize, Vec<i64>)> = d
                .black
                .iter()
                .map(|b| {
                    let mut ks: Vec<i64> = d
                        .edges
                        .iter()
                        .filter(|e| e.black == b.id)
                        .map(|e| e.k.abs())
                        .collect();
                    ks.sort();
                    (d.valence(&b.id), ks)
                })
                .collect();
            vals.sort();
            let mut ranks: Vec<usize> = d.white.iter().map(|w| w.rank).collect();
            ranks.sort();
            (vals, ranks)
        };
        prop_assert_eq!(shape(&f), shape(&h));
    }

    #[test]
    fn random_linear_maps_satisfy_delta_invariants(seed in any::<u64>()) {
        let f = random_linear(&mut seeded(seed));
        let a = analyze(&f).unwrap();
        prop_assert_eq!(a.growth.overall, Growth::Poly(1));
        let classes = nielsen_cycle_classes(&f, &a).unwrap();
        let d = build_delta(&f, &a).delta;
        prop_assert!(d.validate(true).is_ok());
        for w in &d.white {
            prop_assert!(w.rank >= 2);
        }
        for b in &d.black {
            prop_assert!(d.valence(&b.id) >= 2);
        }
        for class in &classes {
            let central_rank = a.spaces[class.central_component].rank;
            let expected = class.edges.len() + usize::from(central_rank > 1);
            // Roots use fixed edges only, so T is read from the central component.
            prop_assert_eq!(class.high_rank_vertices.is_empty(), central_rank <= 1);
            let axis = class.axis.display(f.graph());
            if let Some(b) = d.black.iter().find(|b| b.axis == axis) {
                let leaves = d.edges.iter().filter(|e| e.black == b.id && e.via != CENTRAL).count();
                prop_assert!(leaves <= class.edges.len());
                if leaves == class.edges.len() {
                    prop_assert_eq!(d.valence(&b.id), expected);
                }
            } else {
                prop_assert!(expected <= 1 || class.edges.len() <= 1);
            }
        }
        let (back, _) = parse_delta(&d.to_json(), false).unwrap();
        prop_assert_eq!(back, d.clone());
        prop_assert_eq!(excessive_linearity(&f, &a).is_none(), d.unbranched());
    }

    #[test]
    fn rank_two_maps_are_hhg(seed in any::<u64>()) {
        let f = random_rank2(&mut seeded(seed));
        prop_assert_eq!(f.graph().rank(), 2);
        prop_assert!(decide(&f).unwrap().hhg);
    }

    #[test]
    fn powers_of_random_linear_maps_agree(seed in any::<u64>()) {
        let f = random_linear(&mut seeded(seed));
        let v1 = decide(&f).unwrap();
        let v2 = decide(&f.power(2).unwrap()).unwrap();
        prop_assert_eq!(v1, v2);
    }
}

#[test]
fn iterates_agree_with_repeated_mapping() {
    for name in FIXTURES {
        let f = fixture(name);
        let g = f.graph();
        for d in g.darts() {
            for k in 1..=10 {
                let next = f.iterate_edge(d, k + 1);
                assert_eq!(
                    next,
                    f.map_path(&f.iterate_edge(d, k)),
                    "{name}: {} at k={k}",
                    g.dart_name(d)
                );
            }
        }
    }
}

#[test]
fn filtration_is_invariant() {
    for name in FIXTURES {
        let f = fixture(name);
        let fil = compute_filtration(&f);
        for r in 0..fil.strata.len() {
            let cumulative: BTreeSet<_> = fil.cumulative(r).into_iter().collect();
            for &e in &fil.strata[r] {
                for d in f.edge_image(e) {
                    assert!(
                        cumulative.contains(&d.edge()),
                        "{name}: stratum {r} escapes"
                    );
                }
            }
        }
    }
}

#[test]
fn exponential_strata_double() {
    let f = fixture("eg");
    let r = classify_strata(&f).unwrap();
    assert_eq!(r.eg_strata.len(), 1);
    let stratum = &r.filtration.strata[r.eg_strata[0]];
    let mat = transition_matrix(&f, stratum);
    let total = |v: &[u64]| v.iter().sum::<u64>();
    let start = vec![1u64; stratum.len()];
    let mut v = start.clone();
    let bound = f.graph().rank() * 4;
    let mut doubled = false;
    for _ in 0..bound {
        v = (0..mat.len())
            .map(|i| (0..mat.len()).map(|j| mat[j][i] * v[j]).sum())
            .collect();
        if total(&v) >= 2 * total(&start) {
            doubled = true;
            break;
        }
    }
    assert!(doubled);
}

#[test]
fn axis_grouping_ignores_rotation_and_inversion() {
    let variants = [
        "map b = b a z\nmap c = c z a z a\n",
        "map b = b a z\nmap c = c ~z ~a\n",
        "map b = b z a\nmap c = c ~a ~z ~a ~z\n",
    ];
    let mut shapes = Vec::new();
    for tail in variants {
        let text = format!(
            "vertex x\nedge a x x\nedge z x x\nedge b x x\nedge c x x\nmap a = a\nmap z = z\n{tail}"
        );
        let f = parse_graph_map(&text).unwrap();
        let a = analyze(&f).unwrap();
        let classes = nielsen_cycle_classes(&f, &a).unwrap();
        assert_eq!(classes.len(), 1, "{tail}");
        assert_eq!(classes[0].edges.len(), 2);
        let d = build_delta(&f, &a).delta;
        shapes.push((d.black.len(), d.white.len(), d.edges.len()));
        assert!(!d.unbranched());
    }
    assert!(shapes.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn pseudo_random_maps_are_reproducible() {
    let a = random_linear(&mut seeded(7));
    let b = random_linear(&mut seeded(7));
    assert_eq!(a, b);
}

#[test]
fn json_round_trip_on_fixture_deltas() {
    for name in common::LINEAR_FIXTURES {
        let f = fixture(name);
        let d = build_delta(&f, &analyze(&f).unwrap()).delta;
        let (back, _) = parse_delta(&d.to_json(), false).unwrap();
        assert_eq!(back, d, "{name}");
    }
}
