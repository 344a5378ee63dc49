// temporary probe, deleted before finishing
use refsim::reduce::{reduce_full, ReduceConfig, Reducer, SimMode};
use refsim::syntax::parse;

#[test]
fn probe() {
    let cfg = ReduceConfig {
        sim_mode: SimMode::Cons,
        ..ReduceConfig::default()
    };
    let body = parse("<a>true & <a>false").unwrap();
    let mut reducer = Reducer::new(cfg.clone());
    let naive = reducer.eliminate_simulation_diamond_ungated(&body).unwrap();
    println!("naive = {naive}");

    let out = reduce_full(
        &parse("[sim]<sim>p -> <sim>[sim]p").unwrap(),
        &ReduceConfig::default(),
    )
    .unwrap();
    println!("mckinsey = {out}");

    let out = reduce_full(&parse("[orig]([a]p -> [b]p)").unwrap(), &ReduceConfig::default());
    println!("oexch = {out:?}");

    let cfg2 = ReduceConfig {
        max_dnf_clauses: 2,
        ..ReduceConfig::default()
    };
    let f = parse("<ref>((p | q) & (r | s) & (t | u))").unwrap();
    println!("cap = {:?}", reduce_full(&f, &cfg2));
}
