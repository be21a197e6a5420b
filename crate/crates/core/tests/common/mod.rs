#![allow(dead_code)]

/// Every nonempty antichain of nonempty subsets of `n` sources, by checking
/// all families of subsets.
pub fn brute_force_antichains(n: usize) -> Vec<Vec<u32>> {
    let subsets: Vec<u32> = (1..(1u32 << n)).collect();
    let mut out = Vec::new();
    for family in 1u64..(1u64 << subsets.len()) {
        let members: Vec<u32> = subsets
            .iter()
            .enumerate()
            .filter(|(i, _)| family >> i & 1 == 1)
            .map(|(_, &s)| s)
            .collect();
        let incomparable = members
            .iter()
            .all(|&a| members.iter().all(|&b| a == b || a & b != a));
        if incomparable {
            out.push(members);
        }
    }
    out
}

pub fn render(members: &[u32]) -> String {
    let mut parts: Vec<String> = members
        .iter()
        .map(|&m| {
            let digits: String = (0..5)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| i.to_string())
                .collect();
            format!("{{{digits}}}")
        })
        .collect();
    parts.sort();
    parts.concat()
}

/// `a` lies below `b` when every member of `b` contains some member of `a`.
pub fn below(a: &[u32], b: &[u32]) -> bool {
    b.iter().all(|&bm| a.iter().any(|&am| am & !bm == 0))
}

/// Antichains of `2^[n+1]` (the Dedekind number) equal the pairs `f ≤ g` of
/// monotone Boolean functions on `n` variables.
pub fn dedekind_by_pairs(n: usize) -> usize {
    let points = 1usize << n;
    let monotone: Vec<u32> = (0u32..(1u32 << points))
        .filter(|&f| {
            (0..points)
                .all(|x| (0..n).all(|b| x >> b & 1 == 1 || f >> x & 1 <= f >> (x | 1 << b) & 1))
        })
        .collect();
    monotone
        .iter()
        .map(|&f| monotone.iter().filter(|&&g| f & g == f).count())
        .sum()
}
