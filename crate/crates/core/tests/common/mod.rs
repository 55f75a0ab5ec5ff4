#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use fbc_core::{parse_graph_map, Dart, EdgeId, GraphMap, MarkedGraph};
use rand::seq::SliceRandom;
use rand::Rng;

pub const FIXTURES: [&str; 7] = [
    "gersten", "quad", "notrich1", "notrich2", "rank2", "nested", "eg",
];

/// Fixtures whose maps have linear growth.
pub const LINEAR_FIXTURES: [&str; 5] = ["gersten", "notrich1", "notrich2", "rank2", "nested"];

pub fn fixture_path(file: &str) -> String {
    format!("{}/../../fixtures/{file}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(&format!("{name}.tt"))).expect("fixture exists")
}

pub fn fixture(name: &str) -> GraphMap {
    parse_graph_map(&fixture_text(name)).expect("fixture parses")
}

/// A random normal-form map on a graph of rank two: a rose with a fixed
/// loop and a twisted loop, a barbell with one twisted bar, or a theta
/// graph with one twisted edge. Names and orientations are shuffled.
pub fn random_rank2<R: Rng>(rng: &mut R) -> GraphMap {
    let k = loop {
        let k: i32 = rng.gen_range(-4..=4);
        if k != 0 {
            break k;
        }
    };
    let pow = |w: &str, k: i32| -> String {
        let unit = if k > 0 {
            w.to_string()
        } else {
            format!("~{w}")
        };
        vec![unit; k.unsigned_abs() as usize].join(" ")
    };
    let text = match rng.gen_range(0..4) {
        0 => format!("vertex x\nedge a x x\nedge b x x\nmap a = a\nmap b = b {}\n", pow("a", k)),
        1 => format!(
            "vertex x\nvertex y\nedge a x x\nedge c y y\nedge e x y\nmap a = a\nmap c = c\nmap e = e {}\n",
            pow("c", k)
        ),
        2 => format!(
            "vertex x\nvertex y\nedge a x x\nedge c y y\nedge e x y\nmap a = a\nmap c = c\nmap e = {} e\n",
            pow("a", k)
        ),
        _ => {
            let w = if k > 0 { "~p r" } else { "~r p" };
            format!(
                "vertex x\nvertex y\nedge p x y\nedge q x y\nedge r x y\nmap p = p\nmap r = r\nmap q = q {}\n",
                vec![w; k.unsigned_abs() as usize].join(" ")
            )
        }
    };
    let f = parse_graph_map(&text).expect("generated map parses");
    random_relabel(&f, rng)
}

/// A random linear normal-form map with one to three vertices and rank at
/// most five. Every vertex may carry a fixed loop; the vertices are joined
/// by a tree whose edges are fixed or linear; extra linear edges are added.
/// Each linear edge has a root `τ·l^±1·τ̄` for a fixed loop `l` reached by
/// fixed edges, and twists on a common loop are distinct. Draws with a
/// vertex of valence one are discarded.
pub fn random_linear<R: Rng>(rng: &mut R) -> GraphMap {
    let n: usize = rng.gen_range(1..=3);
    let mut loops: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
    if !loops.iter().any(|&l| l) {
        let i = rng.gen_range(0..n);
        loops[i] = true;
    }
    let parent: Vec<usize> = (0..n)
        .map(|i| if i == 0 { 0 } else { rng.gen_range(0..i) })
        .collect();
    let mut tree_fixed: Vec<bool> = (0..n).map(|i| i == 0 || rng.gen_bool(0.6)).collect();

    let comps = |tree_fixed: &[bool]| -> Vec<usize> {
        let mut comp: Vec<usize> = (0..n).collect();
        for i in 1..n {
            if tree_fixed[i] {
                let (a, b) = (comp[i], comp[parent[i]]);
                for c in comp.iter_mut() {
                    if *c == a {
                        *c = b;
                    }
                }
            }
        }
        comp
    };
    let has_loop = |comp: &[usize], v: usize| (0..n).any(|z| loops[z] && comp[z] == comp[v]);
    // A linear tree edge needs a loop at one of its ends' components.
    loop {
        let comp = comps(&tree_fixed);
        let bad =
            (1..n).find(|&i| !tree_fixed[i] && !has_loop(&comp, i) && !has_loop(&comp, parent[i]));
        match bad {
            Some(i) => tree_fixed[i] = true,
            None => break,
        }
    }
    let comp = comps(&tree_fixed);

    let vname = |i: usize| format!("v{i}");
    let mut edges: Vec<(String, usize, usize)> = Vec::new();
    let mut maps: BTreeMap<String, String> = BTreeMap::new();
    for z in (0..n).filter(|&z| loops[z]) {
        let name = format!("l{z}");
        edges.push((name.clone(), z, z));
        maps.insert(name.clone(), name);
    }
    for i in 1..n {
        let name = format!("t{i}");
        edges.push((name.clone(), parent[i], i));
        if tree_fixed[i] {
            maps.insert(name.clone(), name);
        }
    }

    // Fixed paths inside a component.
    let fixed_path = |from: usize, to: usize| -> Vec<String> {
        let mut prev: Vec<Option<(usize, String)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(x) = q.pop_front() {
            for i in 1..n {
                if !tree_fixed[i] {
                    continue;
                }
                let step = if parent[i] == x {
                    Some((i, format!("t{i}")))
                } else if i == x {
                    Some((parent[i], format!("~t{i}")))
                } else {
                    None
                };
                if let Some((y, d)) = step {
                    if !seen[y] {
                        seen[y] = true;
                        prev[y] = Some((x, d));
                        q.push_back(y);
                    }
                }
            }
        }
        let mut out = Vec::new();
        let mut cur = to;
        while cur != from {
            let (p, d) = prev[cur].clone().expect("same component");
            out.push(d);
            cur = p;
        }
        out.reverse();
        out
    };
    let inv = |d: &str| d.strip_prefix('~').map_or(format!("~{d}"), str::to_string);

    let mut used: BTreeSet<(usize, i32)> = BTreeSet::new();
    let mut root_at = |y: usize, rng: &mut R| -> Option<Vec<String>> {
        let zs: Vec<usize> = (0..n).filter(|&z| loops[z] && comp[z] == comp[y]).collect();
        for _ in 0..20 {
            let z = *zs.choose(rng)?;
            let d: i32 = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
            if !used.insert((z, d)) {
                continue;
            }
            let tau = fixed_path(y, z);
            let l = if d > 0 {
                format!("l{z}")
            } else {
                format!("~l{z}")
            };
            let mut w = tau.clone();
            w.extend(std::iter::repeat_n(l, d.unsigned_abs() as usize));
            w.extend(tau.iter().rev().map(|s| inv(s)));
            return Some(w);
        }
        None
    };

    for i in 1..n {
        if tree_fixed[i] {
            continue;
        }
        let name = format!("t{i}");
        if has_loop(&comp, i) {
            if let Some(w) = root_at(i, rng) {
                maps.insert(name.clone(), format!("{name} {}", w.join(" ")));
                continue;
            }
        }
        if let Some(w) = root_at(parent[i], rng) {
            // ~t ↦ ~t·w, so t ↦ w̄·t.
            let wbar: Vec<String> = w.iter().rev().map(|s| inv(s)).collect();
            maps.insert(name.clone(), format!("{} {name}", wbar.join(" ")));
        } else {
            maps.insert(name.clone(), name);
        }
    }
    let loops_count = loops.iter().filter(|&&l| l).count();
    let linear_so_far = maps.iter().filter(|(k, v)| *k != *v).count();
    let max_extra = 5 - loops_count.min(5);
    let mut extra = rng.gen_range(0..=max_extra);
    if linear_so_far == 0 && extra == 0 && max_extra > 0 {
        extra = 1;
    }
    let targets: Vec<usize> = (0..n).filter(|&v| has_loop(&comp, v)).collect();
    for j in 0..extra {
        let y = *targets.choose(rng).expect("some component has a loop");
        let s = rng.gen_range(0..n);
        let Some(w) = root_at(y, rng) else { break };
        let name = format!("e{j}");
        edges.push((name.clone(), s, y));
        maps.insert(name.clone(), format!("{name} {}", w.join(" ")));
    }

    let valence_one = (0..n).any(|v| {
        let ends: usize = edges
            .iter()
            .map(|(_, s, t)| usize::from(*s == v) + usize::from(*t == v))
            .sum();
        ends < 2
    });
    if valence_one {
        return random_linear(rng);
    }

    let mut text = String::new();
    for i in 0..n {
        text.push_str(&format!("vertex {}\n", vname(i)));
    }
    for (name, s, t) in &edges {
        text.push_str(&format!("edge {name} {} {}\n", vname(*s), vname(*t)));
    }
    for (name, img) in &maps {
        text.push_str(&format!("map {name} = {img}\n"));
    }
    let f =
        parse_graph_map(&text).unwrap_or_else(|e| panic!("generated map must parse: {e}\n{text}"));
    random_relabel(&f, rng)
}

/// The same map with vertices and edges renamed, vertex and edge order
/// shuffled and some edges reversed.
pub fn random_relabel<R: Rng>(f: &GraphMap, rng: &mut R) -> GraphMap {
    let g = f.graph();
    let mut vorder: Vec<usize> = (0..g.vertex_count()).collect();
    vorder.shuffle(rng);
    let mut eorder: Vec<usize> = (0..g.edge_count()).collect();
    eorder.shuffle(rng);
    let flip: Vec<bool> = (0..g.edge_count()).map(|_| rng.gen_bool(0.5)).collect();
    relabel_with(f, &vorder, &eorder, &flip)
}

/// Relabels with new vertex order `vorder`, edge order `eorder` and edge
/// reversals `flip` (indexed by old edge).
pub fn relabel_with(f: &GraphMap, vorder: &[usize], eorder: &[usize], flip: &[bool]) -> GraphMap {
    let g = f.graph();
    let vname = |v: usize| format!("V{}", g.vertex_name(fbc_core::VertexId(v as u32)));
    let ename = |e: usize| format!("E{}", g.edge_name(EdgeId(e as u32)));
    let vertices: Vec<String> = vorder.iter().map(|&v| vname(v)).collect();
    let edges: Vec<(String, String, String)> = eorder
        .iter()
        .map(|&e| {
            let id = EdgeId(e as u32);
            let (s, t) = (g.source(id).index(), g.target(id).index());
            let (s, t) = if flip[e] { (t, s) } else { (s, t) };
            (ename(e), vname(s), vname(t))
        })
        .collect();
    let new_graph = MarkedGraph::new(vertices, edges).expect("relabelled graph is valid");
    let edge_map: Vec<Dart> = (0..g.edge_count())
        .map(|e| {
            let pos = eorder.iter().position(|&x| x == e).expect("permutation");
            let id = EdgeId(pos as u32);
            if flip[e] {
                id.backward()
            } else {
                id.forward()
            }
        })
        .collect();
    f.relabel(new_graph, &edge_map)
        .expect("relabelling preserves validity")
}
