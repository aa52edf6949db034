use crate::cnf::Cnf;

/// Variable interaction graph: an edge joins two variables that share a
/// clause. Adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vig {
    adj: Vec<Vec<u32>>,
    occurs: Vec<bool>,
}

pub fn build_vig(cnf: &Cnf) -> Vig {
    let n = cnf.num_vars() as usize;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    let mut occurs = vec![false; n + 1];
    for c in cnf.clauses() {
        let vars = c.var_set();
        for (i, &u) in vars.iter().enumerate() {
            occurs[u as usize] = true;
            for &v in &vars[i + 1..] {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    Vig { adj, occurs }
}

impl Vig {
    pub fn num_vars(&self) -> u32 {
        self.adj.len() as u32 - 1
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// Variables that appear in some clause.
    pub fn nodes(&self) -> impl Iterator<Item = u32> + '_ {
        (1..self.adj.len() as u32).filter(|&v| self.occurs[v as usize])
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes().count()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Mean degree over occurring variables; 0 for an empty graph.
    pub fn mean_degree(&self) -> f64 {
        let nodes = self.num_nodes();
        if nodes == 0 {
            0.0
        } else {
            2.0 * self.num_edges() as f64 / nodes as f64
        }
    }

    /// Occurring variable of highest degree, lowest index on ties.
    pub fn max_degree_node(&self) -> Option<u32> {
        self.nodes()
            .max_by(|&a, &b| self.degree(a).cmp(&self.degree(b)).then(b.cmp(&a)))
    }
}
