//! Quick agreement sweep between the forest procedure and the oracle.

use finent::interp::{check_model, transitive_closure};
use finent::oracle::{find_countermodel, SearchBudget, SearchOutcome};
use finent::query::eval_ucq;
use finent::soi::{decide_soi, SoiOptions, SoiOutcome};
use finent::textio::{parse_kb, parse_query};

fn main() {
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
    let mut mismatches = 0;
    for (k, (kb_text, q_text)) in corpus.iter().enumerate() {
        let kb = parse_kb(kb_text).unwrap();
        let q = parse_query(q_text, &kb.sig).unwrap();
        let t0 = std::time::Instant::now();
        let out = decide_soi(&kb, &q, &SoiOptions::default()).unwrap();
        let dt = t0.elapsed();
        let oracle = find_countermodel(&kb, &q, &SearchBudget::sized(4));
        let note = match (&out, &oracle) {
            (SoiOutcome::Entailed, SearchOutcome::CounterModelFound(m)) => {
                mismatches += 1;
                format!("MISMATCH (oracle model size {})", m.size())
            }
            (SoiOutcome::Entailed, _) => "agrees (no model ≤ 4)".to_string(),
            (SoiOutcome::NotEntailed { countermodel, .. }, o) => {
                let m = countermodel.as_ref().expect("synthesis on");
                assert!(check_model(m, &kb).is_empty(), "synthesized model fails the user KB");
                let closed = transitive_closure(m, &kb);
                assert!(!eval_ucq(&q, &closed), "synthesized model matches the query");
                match o {
                    SearchOutcome::CounterModelFound(_) => format!("agrees (model size {})", m.size()),
                    _ => {
                        mismatches += 1;
                        format!("MISMATCH? procedure model size {} but oracle found none ≤ 4", m.size())
                    }
                }
            }
        };
        let verdict = if out.entailed() { "ENTAILED" } else { "NOT_ENTAILED" };
        println!("#{k}: {verdict:12} {dt:>10.2?}  {note}");
    }
    println!("mismatches: {mismatches}");
    std::process::exit(if mismatches > 0 { 1 } else { 0 });
}
