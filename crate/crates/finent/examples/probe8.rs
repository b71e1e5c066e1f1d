use finent::kb::preprocess_soi;
use finent::soi::{rewrite_query_nominal_free, BuildOptions, KbAutomaton};
use finent::textio::{parse_kb, parse_query};
use finent::automata::{self, Limits};

fn main() {
    let kb = parse_kb("CONCEPT A\nCONCEPT B\nROLE r\nROLE s TRANSITIVE\nINDIVIDUAL a\nCI A SUBCLASSOF some s. B\nCI B SUBCLASSOF some r. A\nA(a)\n").unwrap();
    let q = parse_query("Q <- s(x,y), r(y,z)\n", &kb.sig).unwrap();
    let t = std::time::Instant::now();
    let pre = preprocess_soi(&kb).unwrap();
    eprintln!("preprocess: {:?}, {} completions", t.elapsed(), pre.completions.len());
    let completion = &pre.completions[0];
    let t = std::time::Instant::now();
    let rw = rewrite_query_nominal_free(&q, completion, &pre.markers);
    eprintln!("rewrite: {:?}, {} conjuncts (subdiv {})", t.elapsed(), rw.cqs.len(), rw.after_subdivision);
    for c in &rw.cqs { eprintln!("  conjunct: {:?}", c.cq); }
    let t = std::time::Instant::now();
    let aut = KbAutomaton::new(completion, &pre.markers, rw.cqs, &BuildOptions::default());
    let (labels, edges) = aut.alphabet();
    eprintln!("build: {:?}, |labels|={}, |edges|={}", t.elapsed(), labels.len(), edges.len());
    let t = std::time::Instant::now();
    let rep = automata::is_empty(&aut, &Limits::default()).unwrap();
    eprintln!("emptiness: {:?} empty={} states={} bundles={}", t.elapsed(), rep.empty, rep.states_discovered, rep.bundles_discovered);
}
