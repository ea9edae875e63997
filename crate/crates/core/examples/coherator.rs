use globwb::theory::library::{groupoidalize, inverse_counts, standard_library};
use globwb::theory::Kind;

fn main() {
    let th = standard_library(3, Kind::Categorical).unwrap();
    println!("symbols per stage {:?}", th.counts_by_stage());
    let bad = th.audit().into_iter().filter(|(_, r)| r.is_err()).count();
    println!("audit failures: {bad}");
    for (k, v) in &th.systems {
        println!("{k}: {}", v.join(" "));
    }
    for name in ["c2", "assoc0", "pentagonator"] {
        if let Ok(t) = th.symbol_term(name) {
            println!("{name}: {} ⇒ {}", th.src(&t).unwrap(), th.tgt(&t).unwrap());
        }
    }
    let w = groupoidalize(&standard_library(3, Kind::Groupoidal).unwrap()).unwrap();
    println!("inverse symbols (i, k, k-equations): {:?}", inverse_counts(&w));
}
