use qboson::algebra::{standard_states, Op};
use qboson::boson::{OscConfig, SpaceSpec, ZVector};
use qboson::coeff::{rat, ratio};
use std::time::Instant;

fn main() {
    let cfg = OscConfig::one_zero();
    let spaces = [
        SpaceSpec::alpha(rat(0), rat(0)),
        SpaceSpec::alpha(ratio(1, 2), rat(0)),
        SpaceSpec::alpha(rat(1), rat(0)),
        SpaceSpec::alpha(rat(-1), rat(0)),
    ];
    let states = standard_states(&cfg, &spaces, 3);
    println!("input states: {}", states.len());
    let x2 = Op::X { plus: true, i: 2, m: rat(-2) };
    let x1 = Op::X { plus: true, i: 1, m: rat(-2) };

    let t = Instant::now();
    let mut stage1: Vec<ZVector> = Vec::new();
    for (_, st) in &states {
        stage1.push(x2.apply(&cfg, &ZVector::from_state(st.clone())));
    }
    let n1: usize = stage1.iter().map(|v| v.iter().map(|(_, fv)| fv.len()).sum::<usize>()).sum();
    println!("stage1: {:.2}s, total terms {}", t.elapsed().as_secs_f64(), n1);

    let t = Instant::now();
    let mut stage2: Vec<ZVector> = Vec::new();
    for v in &stage1 {
        stage2.push(x1.apply(&cfg, v));
    }
    let n2: usize = stage2.iter().map(|v| v.iter().map(|(_, fv)| fv.len()).sum::<usize>()).sum();
    println!("stage2: {:.2}s, total terms {}", t.elapsed().as_secs_f64(), n2);

    let t = Instant::now();
    let mut stage3: Vec<ZVector> = Vec::new();
    for v in stage2.iter() {
        stage3.push(x1.apply(&cfg, v));
    }
    let n3: usize = stage3.iter().map(|v| v.iter().map(|(_, fv)| fv.len()).sum::<usize>()).sum();
    println!("stage3: {:.2}s, total terms {}", t.elapsed().as_secs_f64(), n3);
}
// (appended scratch: coefficient shape stats run via second binary not needed)
// scratch tail
