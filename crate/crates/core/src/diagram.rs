//! Knot diagrams on the sphere, stored as signed Gauss codes.
//!
//! A diagram is the cyclic sequence of passages met while walking along the
//! knot, each passage naming a crossing and whether the walk goes over it,
//! plus the sign of every crossing. O/U data together with signs fixes the
//! rotation system, so two diagrams are sphere-isotopic exactly when their
//! canonical keys agree. The key quantifies over basepoint and orientation of
//! the knot but not over reflection, so mirror images get distinct keys.
//!
//! Edge `k` runs from passage `k` to passage `k + 1` (cyclically). In PD form
//! edge `k` carries the 1-based arc label `k + 1`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Passage {
    pub crossing: usize,
    pub over: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagram {
    seq: Vec<Passage>,
    signs: Vec<i8>,
    key: String,
}

/// A face boundary, traversed with the face on the left. Each entry is an
/// edge and whether the traversal follows the knot's orientation.
pub type Face = Vec<(usize, bool)>;

/// Sphere map data derived from the Gauss code.
#[derive(Clone, Debug)]
pub(crate) struct MapData {
    /// PD-style slots per crossing, counterclockwise from the incoming under edge.
    pub slots: Vec<[usize; 4]>,
    pub faces: Vec<Face>,
    /// `corner_face[c][j]` is the face containing the corner between slots `j` and `j + 1`.
    pub corner_face: Vec<[usize; 4]>,
    /// Face on the left (`[k][0]`) and right (`[k][1]`) of edge `k`.
    pub edge_faces: Vec<[usize; 2]>,
}

impl Diagram {
    /// The crossingless diagram.
    pub fn empty() -> Self {
        Diagram {
            seq: Vec::new(),
            signs: Vec::new(),
            key: "K0:".to_string(),
        }
    }

    /// Builds a diagram from a signed Gauss code, checking that it describes a
    /// single-component diagram on the sphere.
    pub fn from_gauss(seq: Vec<Passage>, signs: Vec<i8>) -> Result<Self> {
        let n = signs.len();
        if seq.len() != 2 * n {
            return Err(Error::InvalidDiagram(format!(
                "{} passages for {n} crossings",
                seq.len()
            )));
        }
        let mut seen = vec![[false; 2]; n];
        for p in &seq {
            if p.crossing >= n {
                return Err(Error::InvalidDiagram(format!("crossing {} out of range", p.crossing)));
            }
            let slot = &mut seen[p.crossing][p.over as usize];
            if *slot {
                return Err(Error::InvalidDiagram(format!(
                    "crossing {} passed {} twice",
                    p.crossing,
                    if p.over { "over" } else { "under" }
                )));
            }
            *slot = true;
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidDiagram(format!("crossing sign {s}")));
        }
        let raw = Diagram {
            seq,
            signs,
            key: String::new(),
        };
        let faces = raw.map_data().faces.len();
        if faces != n + 2 {
            return Err(Error::InvalidDiagram(format!(
                "not planar: {faces} faces for {n} crossings"
            )));
        }
        Ok(raw.canonicalize())
    }

    pub(crate) fn from_gauss_unchecked(seq: Vec<Passage>, signs: Vec<i8>) -> Self {
        Diagram {
            seq,
            signs,
            key: String::new(),
        }
        .canonicalize()
    }

    /// Parses a canonical key back into a diagram.
    pub fn from_key(key: &str) -> Result<Self> {
        let bad = || Error::InvalidDiagram(format!("malformed key {key:?}"));
        let rest = key.strip_prefix('K').ok_or_else(bad)?;
        let (count, body) = rest.split_once(':').ok_or_else(bad)?;
        let n: usize = count.parse().map_err(|_| bad())?;
        let mut seq = Vec::with_capacity(2 * n);
        let mut signs = vec![0i8; n];
        let bytes = body.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if start == i || i + 2 > bytes.len() {
                return Err(bad());
            }
            let label: usize = body[start..i].parse().map_err(|_| bad())?;
            if label == 0 || label > n {
                return Err(bad());
            }
            let over = match bytes[i] {
                b'O' => true,
                b'U' => false,
                _ => return Err(bad()),
            };
            let sign = match bytes[i + 1] {
                b'+' => 1,
                b'-' => -1,
                _ => return Err(bad()),
            };
            i += 2;
            let c = label - 1;
            if signs[c] != 0 && signs[c] != sign {
                return Err(bad());
            }
            signs[c] = sign;
            seq.push(Passage { crossing: c, over });
        }
        let d = Self::from_gauss(seq, signs)?;
        if d.key != key {
            return Err(Error::InvalidDiagram(format!("{key:?} is not in canonical form")));
        }
        Ok(d)
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn n_crossings(&self) -> usize {
        self.signs.len()
    }

    pub fn passages(&self) -> &[Passage] {
        &self.seq
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// Swaps over and under at every crossing.
    pub fn mirror(&self) -> Diagram {
        let seq = self
            .seq
            .iter()
            .map(|p| Passage {
                crossing: p.crossing,
                over: !p.over,
            })
            .collect();
        let signs = self.signs.iter().map(|s| -s).collect();
        Diagram::from_gauss_unchecked(seq, signs)
    }

    pub fn faces(&self) -> Vec<Face> {
        self.map_data().faces
    }

    /// Knot determinant from the Goeritz matrix of a checkerboard colouring.
    pub fn determinant(&self) -> u64 {
        let n = self.n_crossings();
        if n == 0 {
            return 1;
        }
        let map = self.map_data();
        let nf = map.faces.len();
        let mut color = vec![u8::MAX; nf];
        let mut adj = vec![Vec::new(); nf];
        for ef in &map.edge_faces {
            adj[ef[0]].push(ef[1]);
            adj[ef[1]].push(ef[0]);
        }
        color[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(f) = queue.pop_front() {
            for &g in &adj[f] {
                if color[g] == u8::MAX {
                    color[g] = 1 - color[f];
                    queue.push_back(g);
                }
            }
        }
        let white: Vec<usize> = (0..nf).filter(|&f| color[f] == 0).collect();
        let mut index = vec![usize::MAX; nf];
        for (i, &f) in white.iter().enumerate() {
            index[f] = i;
        }
        let m = white.len();
        let mut g = vec![vec![0i128; m]; m];
        for corners in &map.corner_face {
            let (j, eta) = if color[corners[0]] == 0 { (0, 1) } else { (1, -1) };
            let (a, b) = (index[corners[j]], index[corners[j + 2]]);
            if a != b {
                g[a][b] -= eta;
                g[b][a] -= eta;
                g[a][a] += eta;
                g[b][b] += eta;
            }
        }
        if m <= 1 {
            return 1;
        }
        g.truncate(m - 1);
        for row in &mut g {
            row.truncate(m - 1);
        }
        bareiss_det(g).unsigned_abs() as u64
    }

    /// Parses PD text: one `X a b c d` line per crossing, `#` comments allowed.
    /// The word `empty` (or no crossing lines) gives the crossingless diagram.
    pub fn parse_pd(text: &str) -> Result<Self> {
        let mut crossings = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.eq_ignore_ascii_case("empty") {
                continue;
            }
            let mut parts = line.split_whitespace();
            if parts.next() != Some("X") {
                return Err(Error::Format(format!("bad PD line {line:?}")));
            }
            let labels: Vec<usize> = parts
                .map(|s| s.parse().map_err(|_| Error::Format(format!("bad PD label in {line:?}"))))
                .collect::<Result<_>>()?;
            if labels.len() != 4 {
                return Err(Error::Format(format!("PD line needs 4 labels: {line:?}")));
            }
            crossings.push([labels[0], labels[1], labels[2], labels[3]]);
        }
        Self::from_pd(&crossings)
    }

    /// Builds a diagram from PD crossings (counterclockwise from the incoming under arc).
    pub fn from_pd(pd: &[[usize; 4]]) -> Result<Self> {
        let n = pd.len();
        if n == 0 {
            return Ok(Self::empty());
        }
        let mut where_label: std::collections::HashMap<usize, Vec<(usize, usize)>> =
            std::collections::HashMap::new();
        for (c, x) in pd.iter().enumerate() {
            for (s, &l) in x.iter().enumerate() {
                where_label.entry(l).or_default().push((c, s));
            }
        }
        if let Some((l, v)) = where_label.iter().find(|(_, v)| v.len() != 2) {
            return Err(Error::InvalidDiagram(format!(
                "arc label {l} appears {} times",
                v.len()
            )));
        }
        let mut seq = Vec::with_capacity(2 * n);
        let mut signs = vec![0i8; n];
        let (mut c, mut s) = (0usize, 0usize);
        loop {
            match s {
                0 => seq.push(Passage { crossing: c, over: false }),
                1 | 3 => {
                    let sign = if s == 1 { -1 } else { 1 };
                    if signs[c] != 0 && signs[c] != sign {
                        return Err(Error::InvalidDiagram(format!("crossing {c} entered twice over")));
                    }
                    signs[c] = sign;
                    seq.push(Passage { crossing: c, over: true });
                }
                _ => {
                    return Err(Error::InvalidDiagram(format!(
                        "arc enters crossing {c} at its outgoing under slot"
                    )))
                }
            }
            if seq.len() > 2 * n {
                return Err(Error::InvalidDiagram("traversal does not close".into()));
            }
            let exit = (s + 2) % 4;
            let label = pd[c][exit];
            let ends = &where_label[&label];
            let next = if ends[0] == (c, exit) { ends[1] } else { ends[0] };
            (c, s) = next;
            if (c, s) == (0, 0) {
                break;
            }
        }
        if seq.len() != 2 * n {
            return Err(Error::InvalidDiagram(
                "PD has more than one component".into(),
            ));
        }
        Self::from_gauss(seq, signs)
    }

    /// PD crossings with edge `k` labelled `k + 1`.
    pub fn to_pd(&self) -> Vec<[usize; 4]> {
        self.map_data()
            .slots
            .iter()
            .map(|s| [s[0] + 1, s[1] + 1, s[2] + 1, s[3] + 1])
            .collect()
    }

    pub fn to_pd_text(&self) -> String {
        let mut out = String::new();
        for x in self.to_pd() {
            let _ = writeln!(out, "X {} {} {} {}", x[0], x[1], x[2], x[3]);
        }
        out
    }

    pub(crate) fn map_data(&self) -> MapData {
        let n = self.n_crossings();
        let m = 2 * n;
        if n == 0 {
            return MapData {
                slots: Vec::new(),
                faces: vec![vec![(0, true)], vec![(0, false)]],
                corner_face: Vec::new(),
                edge_faces: vec![[0, 1]],
            };
        }
        let mut pos = vec![[usize::MAX; 2]; n]; // [under, over]
        for (i, p) in self.seq.iter().enumerate() {
            pos[p.crossing][p.over as usize] = i;
        }
        let mut slots = vec![[0usize; 4]; n];
        // edge k: (crossing, slot) where it starts and ends
        let mut start = vec![(0usize, 0usize); m];
        let mut end = vec![(0usize, 0usize); m];
        for c in 0..n {
            let [pu, po] = pos[c];
            let in_u = (pu + m - 1) % m;
            let in_o = (po + m - 1) % m;
            slots[c] = if self.signs[c] < 0 {
                [in_u, in_o, pu, po]
            } else {
                [in_u, po, pu, in_o]
            };
            let (in_o_slot, out_o_slot) = if self.signs[c] < 0 { (1, 3) } else { (3, 1) };
            end[in_u] = (c, 0);
            start[pu] = (c, 2);
            end[in_o] = (c, in_o_slot);
            start[po] = (c, out_o_slot);
        }
        let mut dart_face = vec![[usize::MAX; 4]; n];
        let mut corner_face = vec![[usize::MAX; 4]; n];
        let mut edge_faces = vec![[usize::MAX; 2]; m];
        let mut faces = Vec::new();
        for c0 in 0..n {
            for s0 in 0..4 {
                if dart_face[c0][s0] != usize::MAX {
                    continue;
                }
                let f = faces.len();
                let mut face = Vec::new();
                let (mut c, mut s) = (c0, s0);
                while dart_face[c][s] == usize::MAX {
                    dart_face[c][s] = f;
                    let leave = (s + 3) % 4;
                    corner_face[c][leave] = f;
                    let e = slots[c][leave];
                    let fwd = start[e] == (c, leave);
                    face.push((e, fwd));
                    edge_faces[e][if fwd { 0 } else { 1 }] = f;
                    (c, s) = if fwd { end[e] } else { start[e] };
                }
                faces.push(face);
            }
        }
        MapData {
            slots,
            faces,
            corner_face,
            edge_faces,
        }
    }

    fn canonicalize(self) -> Diagram {
        let n = self.n_crossings();
        if n == 0 {
            return Diagram::empty();
        }
        let m = 2 * n;
        let mut best: Option<Vec<(usize, bool, i8)>> = None;
        let mut best_map: Vec<usize> = Vec::new();
        let mut label = vec![usize::MAX; n];
        let mut tokens = Vec::with_capacity(m);
        for reverse in [false, true] {
            for start in 0..m {
                label.iter_mut().for_each(|l| *l = usize::MAX);
                tokens.clear();
                let mut next = 0;
                for step in 0..m {
                    let i = if reverse {
                        (start + m - step) % m
                    } else {
                        (start + step) % m
                    };
                    let p = self.seq[i];
                    if label[p.crossing] == usize::MAX {
                        label[p.crossing] = next;
                        next += 1;
                    }
                    tokens.push((label[p.crossing], p.over, self.signs[p.crossing]));
                }
                let better = match &best {
                    None => true,
                    Some(b) => token_cmp(&tokens, b).is_lt(),
                };
                if better {
                    best = Some(tokens.clone());
                    best_map = label.clone();
                }
            }
        }
        let best = best.expect("nonempty");
        let mut signs = vec![0i8; n];
        for c in 0..n {
            signs[best_map[c]] = self.signs[c];
        }
        let seq: Vec<Passage> = best
            .iter()
            .map(|&(l, over, _)| Passage { crossing: l, over })
            .collect();
        let mut key = format!("K{n}:");
        for &(l, over, s) in &best {
            let _ = write!(
                key,
                "{}{}{}",
                l + 1,
                if over { 'O' } else { 'U' },
                if s > 0 { '+' } else { '-' }
            );
        }
        Diagram { seq, signs, key }
    }
}

fn token_cmp(a: &[(usize, bool, i8)], b: &[(usize, bool, i8)]) -> std::cmp::Ordering {
    // over sorts before under, positive before negative
    let f = |&(l, o, s): &(usize, bool, i8)| (l, !o, -s);
    a.iter().map(f).cmp(b.iter().map(f))
}

/// Key of the mirror diagram, without building the caller's diagram first.
pub fn mirror_key(key: &str) -> Result<String> {
    Ok(Diagram::from_key(key)?.mirror().key().to_string())
}

/// Crossing count recorded in a canonical key.
pub fn key_crossings(key: &str) -> Option<usize> {
    key.strip_prefix('K')?.split_once(':')?.0.parse().ok()
}

/// Fraction-free Gaussian elimination.
fn bareiss_det(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}
