use std::collections::HashMap;

/// Character trie mapping exact strings to the ids stored under them.
#[derive(Debug, Default, Clone)]
pub struct Trie {
    root: Node,
    len: usize,
}

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<char, Node>,
    ids: Vec<u64>,
}

impl Trie {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of stored ids.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, key: &str, id: u64) {
        let mut node = &mut self.root;
        for c in key.chars() {
            node = node.children.entry(c).or_default();
        }
        node.ids.push(id);
        self.len += 1;
    }

    /// Ids stored under exactly `key`, in insertion order.
    pub fn get(&self, key: &str) -> &[u64] {
        let mut node = &self.root;
        for c in key.chars() {
            match node.children.get(&c) {
                Some(n) => node = n,
                None => return &[],
            }
        }
        &node.ids
    }

    pub fn remove(&mut self, key: &str, id: u64) -> bool {
        let chars: Vec<char> = key.chars().collect();
        let removed = remove_rec(&mut self.root, &chars, id);
        if removed {
            self.len -= 1;
        }
        removed
    }
}

fn remove_rec(node: &mut Node, key: &[char], id: u64) -> bool {
    match key.split_first() {
        None => match node.ids.iter().position(|&x| x == id) {
            Some(p) => {
                node.ids.remove(p);
                true
            }
            None => false,
        },
        Some((c, rest)) => {
            let Some(child) = node.children.get_mut(c) else {
                return false;
            };
            let removed = remove_rec(child, rest, id);
            if removed && child.ids.is_empty() && child.children.is_empty() {
                node.children.remove(c);
            }
            removed
        }
    }
}
