use finent::soi::{decide_soi, SoiOptions};
use finent::textio::{parse_kb, parse_query};
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0);
    let corpus: Vec<(&str, &str)> = vec![
        ("CONCEPT A\nCONCEPT B\nROLE r\nINDIVIDUAL a\nCI A SUBCLASSOF some r. B\nA(a)\n", "Q <- B(x)\n"),
        ("CONCEPT A\nCONCEPT B\nROLE r\nINDIVIDUAL a\nCI A SUBCLASSOF some r. B\nCI B SUBCLASSOF not A\nA(a)\n", "Q <- r(x,y), A(y)\n"),
        ("CONCEPT A\nROLE r TRANSITIVE\nINDIVIDUAL a\nCI A SUBCLASSOF some r. A\nA(a)\n", "Q <- r(x,x)\n"),
        ("CONCEPT A\nROLE r TRANSITIVE\nINDIVIDUAL a\nCI A SUBCLASSOF some r. A\nA(a)\n", "Q <- r(x,y)\n"),
        ("CONCEPT A\nCONCEPT B\nROLE r TRANSITIVE\nINDIVIDUAL a\nCI A SUBCLASSOF some r. B\nCI B SUBCLASSOF some r. A\nA(a)\n", "Q <- r(x,x)\n"),
        ("CONCEPT A\nROLE r\nINDIVIDUAL a\nINDIVIDUAL o\nCI A EQUIV {o}\nCI top SUBCLASSOF some r. A\n", "Q <- r(x,y)\n"),
        ("CONCEPT A\nCONCEPT C\nROLE r\nINDIVIDUAL a\nINDIVIDUAL o\nCI A EQUIV {o}\nCI top SUBCLASSOF some r. A\nCI A SUBCLASSOF C\nC(o)\n", "Q <- C(x)\n"),
        ("CONCEPT A\nROLE r\nINDIVIDUAL a\nCI A SUBCLASSOF some inv(r). A\nA(a)\n", "Q <- r(x,y), A(x)\n"),
        ("CONCEPT A\nCONCEPT B\nROLE r\nROLE s TRANSITIVE\nINDIVIDUAL a\nCI A SUBCLASSOF some s. B\nCI B SUBCLASSOF some r. A\nA(a)\n", "Q <- s(x,y), r(y,z)\n"),
        ("CONCEPT A\nINDIVIDUAL a\nCI A SUBCLASSOF not top\nA(a)\n", "Q <- A(x)\n"),
    ];
    let (kb_text, q_text) = corpus[which];
    let kb = parse_kb(kb_text).unwrap();
    let q = parse_query(q_text, &kb.sig).unwrap();
    let t = std::time::Instant::now();
    let out = decide_soi(&kb, &q, &SoiOptions::default()).unwrap();
    println!("#{which}: {:?} entailed={}", t.elapsed(), out.entailed());
}
