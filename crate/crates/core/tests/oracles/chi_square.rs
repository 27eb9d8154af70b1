/// `(stat, df, sf)` from `data/chi_square_sf.csv`, computed with mpmath at 40 digits.
pub fn reference_grid() -> Vec<(f64, u32, f64)> {
    include_str!("../data/chi_square_sf.csv")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            let stat = it.next().unwrap().parse().unwrap();
            let df = it.next().unwrap().parse().unwrap();
            let sf = it.next().unwrap().parse().unwrap();
            (stat, df, sf)
        })
        .collect()
}
