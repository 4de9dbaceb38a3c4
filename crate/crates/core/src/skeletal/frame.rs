//! Frames (nested sets of integer bones) and skeletons.

use std::fmt;
use std::str::FromStr;

use crate::error::{out_of_range, Error, Result};

/// A bone or an ordered list of sub-frames.
///
/// Element order is the construction order; set semantics only matter for
/// membership tests, which ignore it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Frame {
    Bone(u32),
    Set(Vec<Frame>),
}

impl Frame {
    pub fn set(elements: Vec<Frame>) -> Frame {
        Frame::Set(elements)
    }

    /// `{b}`
    pub fn braced_bone(b: u32) -> Frame {
        Frame::Set(vec![Frame::Bone(b)])
    }

    pub fn size(&self) -> usize {
        match self {
            Frame::Bone(_) => 1,
            Frame::Set(es) => es.iter().map(Frame::size).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Frame::Bone(_) => 0,
            Frame::Set(es) => 1 + es.iter().map(Frame::depth).max().unwrap_or(0),
        }
    }

    pub fn is_bone(&self) -> bool {
        matches!(self, Frame::Bone(_))
    }

    pub fn elements(&self) -> &[Frame] {
        match self {
            Frame::Bone(_) => &[],
            Frame::Set(es) => es,
        }
    }

    /// Every set level, this one included, has a bone among its direct
    /// elements.
    pub fn bone_at_every_level(&self) -> bool {
        match self {
            Frame::Bone(_) => true,
            Frame::Set(es) => {
                es.iter().any(Frame::is_bone) && es.iter().all(Frame::bone_at_every_level)
            }
        }
    }

    pub fn bones(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect_bones(&mut out);
        out
    }

    fn collect_bones(&self, out: &mut Vec<u32>) {
        match self {
            Frame::Bone(b) => out.push(*b),
            Frame::Set(es) => es.iter().for_each(|e| e.collect_bones(out)),
        }
    }

    /// Number of set levels strictly inside the outermost one.
    pub fn inner_sets(&self) -> usize {
        match self {
            Frame::Bone(_) => 0,
            Frame::Set(es) => es
                .iter()
                .map(|e| match e {
                    Frame::Bone(_) => 0,
                    Frame::Set(_) => 1 + e.inner_sets(),
                })
                .sum(),
        }
    }

    /// The frame with labels erased, elements sorted by
    /// `(size, depth, canonical string)`. Two frames with the same shape
    /// give the same string.
    pub fn shape(&self) -> String {
        match self {
            Frame::Bone(_) => "*".into(),
            Frame::Set(es) => {
                let mut keyed: Vec<(usize, usize, String)> = es
                    .iter()
                    .map(|e| (e.size(), e.depth(), e.shape()))
                    .collect();
                keyed.sort();
                let parts: Vec<String> = keyed.into_iter().map(|k| k.2).collect();
                format!("{{{}}}", parts.join(", "))
            }
        }
    }

    /// Same ordering as `shape`, keeping labels.
    pub fn canonical(&self) -> Frame {
        match self {
            Frame::Bone(b) => Frame::Bone(*b),
            Frame::Set(es) => {
                let mut kids: Vec<Frame> = es.iter().map(Frame::canonical).collect();
                kids.sort_by_cached_key(|e| (e.size(), e.depth(), e.to_string()));
                Frame::Set(kids)
            }
        }
    }

    /// Membership in `S_k` for `k = size`, ignoring element order.
    pub fn is_skeleton(&self) -> bool {
        let k = self.size() as u32;
        let mut bones = self.bones();
        bones.sort_unstable();
        if !matches!(self, Frame::Set(_)) || bones != (1..=k).collect::<Vec<_>>() {
            return false;
        }
        is_skeleton_of(self, k)
    }
}

fn is_skeleton_of(f: &Frame, k: u32) -> bool {
    let es = match f {
        Frame::Set(es) => es,
        Frame::Bone(_) => return false,
    };
    if k == 1 {
        return es.len() == 1 && es[0] == Frame::Bone(1);
    }
    // {S, k}
    if es.len() == 2 {
        for (x, y) in [(&es[0], &es[1]), (&es[1], &es[0])] {
            if *y == Frame::Bone(k) && matches!(x, Frame::Set(_)) {
                return is_skeleton_of(x, k - 1);
            }
        }
    }
    // S u {{k}}
    if let Some(pos) = es.iter().position(|e| *e == Frame::braced_bone(k)) {
        if es.len() < 2 {
            return false;
        }
        let mut rest = es.clone();
        rest.remove(pos);
        return is_skeleton_of(&Frame::Set(rest), k - 1);
    }
    false
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Bone(b) => write!(f, "{b}"),
            Frame::Set(es) => {
                write!(f, "{{")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Frame> {
        let mut p = FrameParser { src: s.as_bytes(), pos: 0 };
        let f = p.frame()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(f)
    }
}

struct FrameParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl FrameParser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::FrameSyntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn frame(&mut self) -> Result<Frame> {
        self.skip_ws();
        match self.src.get(self.pos) {
            Some(b'{') => {
                self.pos += 1;
                let mut es = vec![self.frame()?];
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        Some(b',') => {
                            self.pos += 1;
                            es.push(self.frame()?);
                        }
                        Some(b'}') => {
                            self.pos += 1;
                            return Ok(Frame::Set(es));
                        }
                        _ => return Err(self.error("expected ',' or '}'")),
                    }
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
                match text.parse::<u32>() {
                    Ok(b) if b > 0 => Ok(Frame::Bone(b)),
                    _ => Err(Error::FrameSyntax {
                        pos: start,
                        msg: format!("bone label {text} is not a positive 32-bit integer"),
                    }),
                }
            }
            Some(_) => Err(self.error("expected '{' or a bone label")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

pub const MAX_SKELETON_SIZE: usize = 24;

/// The `i`-th skeleton of size `k` in recursion order, for
/// `i < 2^(k-1)`.
///
/// `S_{k+1}` lists `{S, k+1}` for every `S` in `S_k` first and then every
/// `S u {{k+1}}`, so bit `j - 2` of `i` records the branch taken when bone
/// `j` was added.
pub fn skeleton_at(k: usize, i: u64) -> Frame {
    let mut s = Frame::braced_bone(1);
    for j in 2..=k {
        let bit = (i >> (j - 2)) & 1;
        let b = j as u32;
        s = if bit == 0 {
            Frame::Set(vec![s, Frame::Bone(b)])
        } else {
            let mut es = match s {
                Frame::Set(es) => es,
                Frame::Bone(_) => unreachable!("skeletons are sets"),
            };
            es.push(Frame::braced_bone(b));
            Frame::Set(es)
        };
    }
    s
}

pub fn skeleton_count(k: usize) -> Result<u64> {
    check_size(k)?;
    Ok(1u64 << (k - 1))
}

fn check_size(k: usize) -> Result<()> {
    if k == 0 || k > MAX_SKELETON_SIZE {
        return Err(out_of_range("k", k, "1..=24"));
    }
    Ok(())
}

/// Lazily walks `S_k` in recursion order.
pub fn skeletons(k: usize) -> Result<impl Iterator<Item = Frame>> {
    let n = skeleton_count(k)?;
    Ok((0..n).map(move |i| skeleton_at(k, i)))
}

/// `S_k` built by the recursion itself, as a list.
pub fn enumerate_skeletons(k: usize) -> Result<Vec<Frame>> {
    check_size(k)?;
    let mut level = vec![Frame::braced_bone(1)];
    for j in 2..=k {
        let b = j as u32;
        let mut next = Vec::with_capacity(level.len() * 2);
        for s in &level {
            next.push(Frame::Set(vec![s.clone(), Frame::Bone(b)]));
        }
        for s in &level {
            let mut es = s.elements().to_vec();
            es.push(Frame::braced_bone(b));
            next.push(Frame::Set(es));
        }
        level = next;
    }
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_levels() {
        let s1: Vec<String> = enumerate_skeletons(1).unwrap().iter().map(|f| f.to_string()).collect();
        assert_eq!(s1, ["{1}"]);
        let s3: Vec<String> = enumerate_skeletons(3).unwrap().iter().map(|f| f.to_string()).collect();
        assert_eq!(
            s3,
            ["{{{1}, 2}, 3}", "{{1, {2}}, 3}", "{{1}, 2, {3}}", "{1, {2}, {3}}"]
        );
        assert_eq!(enumerate_skeletons(5).unwrap().len(), 16);
        assert!(enumerate_skeletons(0).is_err());
        assert!(enumerate_skeletons(25).is_err());
    }

    #[test]
    fn indexed_and_recursive_orders_agree() {
        for k in 1..=10 {
            let listed = enumerate_skeletons(k).unwrap();
            let indexed: Vec<Frame> = skeletons(k).unwrap().collect();
            assert_eq!(listed, indexed);
        }
    }

    #[test]
    fn sizes_and_depths() {
        let f: Frame = "{1,{2},{3}}".parse().unwrap();
        assert_eq!(f.size(), 3);
        let g: Frame = "{{{1},2},3}".parse().unwrap();
        assert_eq!((g.size(), g.depth()), (3, 3));
        assert_eq!((Frame::Bone(7).size(), Frame::Bone(7).depth()), (1, 0));
    }

    #[test]
    fn parser_is_whitespace_insensitive() {
        let f: Frame = " { {1} ,2,\n{ 3 } } ".parse().unwrap();
        assert_eq!(f.to_string(), "{{1}, 2, {3}}");
        for bad in ["{1,", "{}", "{1}}", "{0}", "1 2", "{a}", ""] {
            assert!(matches!(bad.parse::<Frame>(), Err(Error::FrameSyntax { .. })), "{bad}");
        }
    }

    #[test]
    fn skeleton_membership() {
        for k in 1..=8 {
            for s in skeletons(k).unwrap() {
                assert!(s.is_skeleton(), "{s}");
                assert!(s.bone_at_every_level());
                assert_eq!(s.inner_sets(), k - 1);
            }
        }
        for text in ["{2, {1}}", "{{2}, 1}", "{{1}, {2}}", "{1, 2}", "{{1}, 3}", "{{1, 2}, {3}}"] {
            let f: Frame = text.parse().unwrap();
            let expect = text == "{2, {1}}" || text == "{{2}, 1}";
            assert_eq!(f.is_skeleton(), expect, "{text}");
        }
        // order of elements does not matter
        assert!("{{3}, 1, {2}}".parse::<Frame>().unwrap().is_skeleton());
        assert!(!"{{1},{2}}".parse::<Frame>().unwrap().bone_at_every_level());
    }

    #[test]
    fn shapes_forget_labels() {
        let a: Frame = "{{1}, 2}".parse().unwrap();
        let b: Frame = "{1, {2}}".parse().unwrap();
        assert_eq!(a.shape(), b.shape());
        assert_eq!(a.shape(), "{*, {*}}");
        assert_eq!(a.canonical().to_string(), "{2, {1}}");
    }
}
