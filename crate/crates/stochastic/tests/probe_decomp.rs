// temporary probe test
use tff_core::nonlocal::interaction;
use tff_core::FourierField;
use tff_stochastic::*;

#[test]
fn probe_gap_pieces() {
    let t_max = 3.0;
    let steps = 6;
    let d = 3;
    let n_eff = tff_core::RenormTable::effective_cutoff(t_max).max(1);
    let lat = tff_core::ModeLattice::cubic(d, n_eff).unwrap();
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * t_max / steps as f64).collect();
    let scales = BgScaleTables::new(d, &grid, n_eff).unwrap();
    let streams = NoiseStreams::new(55).replica(0);
    let flow = sample_bg_flow(lat, &grid, &streams, StreamPurpose::BgFlow).unwrap();
    let enh = build_bg_enhanced(&flow, &scales).unwrap();
    let k = enh.grid.len() - 1;

    // drift = Zero: u = 0, l = shift
    let mut v = FourierField::zeros(lat);
    let mut a_sum = 0.0; // sum w Re(l, shift)
    let mut b_sum = 0.0; // flux
    let mut hl = 0.0;
    let mut hs = 0.0;
    let trapw = |s: usize| -> f64 {
        let left = if s == 0 { 0.0 } else { (grid[s] - grid[s-1]) / 2.0 };
        let right = if s == k { 0.0 } else { (grid[s+1] - grid[s]) / 2.0 };
        left + right
    };
    for s in 0..=k {
        let w = trapw(s);
        let shift = enh.r_pic2[s].minus(&enh.r_pic3[s]);
        let l = shift.clone();
        let jl = l.mapped(|m, z| z * {
            let x = tff_core::lattice::hat2(m).sqrt();
            if grid[s] <= 0.0 { 0.0 } else { tff_core::rho::jt(x, grid[s]) }
        });
        v.add_scaled(w, &jl);
        a_sum += w * l.l2_pairing(&shift).re;
        let diff = enh.x3[s].minus(&enh.x2pic2[s]);
        b_sum += w * diff.l2_pairing(&jl).re;
        hl += 0.5 * w * l.l2_norm_sq();
        hs += 0.5 * w * shift.l2_norm_sq();
    }
    let p23 = enh.pic2[k].minus(&enh.pic3[k]);
    println!("|v - (pic2-pic3)| = {:e}", v.minus(&p23).l2_norm());
    println!("A (sum w (l,shift)) = {:.12e}", a_sum);
    println!("B (flux)            = {:.12e}", b_sum);
    println!("A - B = {:e}", a_sum - b_sum);
    let bx = &enh.rough_shift[k];
    let bxv = bx.plus(&v);
    let phi = &enh.x[k];
    println!("|phi - (bx+v)| = {:e}  (|phi|={})", phi.minus(&bxv).l2_norm(), phi.l2_norm());
    println!("i(phi) - i(bx+v) = {:e}", interaction(phi) - interaction(&bxv));
    println!("hse fn = {:.12e}, local hs = {:.12e}", half_shift_energy(&enh, k), hs);
    println!("hl = {:.12e}", hl);
    let chk = decomposition_check(&enh, BgDrift::Zero, k, 0.37).unwrap();
    println!("gap = {:e}, lhs = {:e}, mart = {:e}", chk.algebra_gap, chk.lhs, chk.martingale);
}
