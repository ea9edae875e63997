use globwb::cylinder::{boundary_cyl, cyl_glob_sum, cyl_presentation, degenerate_cyl, find_presentation_iso};
use globwb::theory::library::{groupoidalize, standard_library};
use globwb::theory::Kind;
use globwb::tree::Tree;

fn main() {
    let th = groupoidalize(&standard_library(3, Kind::Groupoidal).unwrap()).unwrap();
    for k in 0..=3 {
        let c = cyl_presentation(k, &th).unwrap();
        println!("cyl(D{k}) {:?}", c.computad.counts());
    }
    for g in cyl_presentation(2, &th).unwrap().computad.generators() {
        if let Some((s, t)) = &g.faces {
            println!("  {}: {s} -> {t}", g.name);
        }
    }
    let b = boundary_cyl(1, &th).unwrap();
    println!("boundary of cyl(D1): {:?}, adds {:?}", b.presentation.computad.counts(), b.added);
    let d = degenerate_cyl(1, Some(0), None, &th).unwrap();
    let (s, t) = d.computad.get("F1").unwrap().faces.clone().unwrap();
    println!("collapsed source side: F1: {s} -> {t}");
    for k in 0..=2 {
        let g = cyl_glob_sum(&Tree::globe(k), &th).unwrap();
        let iso = find_presentation_iso(&g.computad, &cyl_presentation(k, &th).unwrap().computad).is_some();
        println!("glob sum D{k} iso: {iso}");
    }
    let a: Tree = "[[[][]][]]".parse().unwrap();
    let g = cyl_glob_sum(&a, &th).unwrap();
    println!("cyl({a}) {:?}, {} inclusions", g.computad.counts(), g.inclusions.len());
}
