use std::time::Instant;
fn main() {
    let t0 = Instant::now();
    let pair = flatk::kdist::MarkedPair::genus2_family(&flatk::num::qr(1, 4), &flatk::num::qr(1, 3)).unwrap();
    let (fwd, bwd) = flatk::kdist::asymmetry_report(&pair, 2.0, &[], &flatk::Config::default()).unwrap();
    println!("genus2 asym: fwd {} bwd {} candidates {} in {:?}", fwd.sup_ratio, bwd.sup_ratio, fwd.candidate_count, t0.elapsed());

    let t1 = Instant::now();
    let l = flatk::corpus::lshape().normalize_area().unwrap();
    let a = flatk::surface::LinearDeformation::diagonal(flatk::num::qi(2)).unwrap();
    let ex = flatk::kdist::k_exact_linear(&l, &a, &flatk::Config::default()).unwrap();
    println!("lshape exact: k {} in {:?}", ex.k, t1.elapsed());

    let t2 = Instant::now();
    let found = flatk::twist::find_equality_case(&flatk::corpus::lshape(), 3.1, &flatk::Config::default()).unwrap();
    println!("equality case: {:?} in {:?}", found.map(|c| (c.alpha.to_string(), c.beta.to_string(), c.report.gap)), t2.elapsed());
}
