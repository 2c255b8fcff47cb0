//! Indented tree printing shared by the AST and relational-algebra dumps.

pub(crate) struct Node {
    head: String,
    children: Vec<Node>,
}

impl Node {
    pub(crate) fn new(head: impl Into<String>, children: Vec<Node>) -> Self {
        Node { head: head.into(), children }
    }

    pub(crate) fn leaf(head: impl Into<String>) -> Self {
        Node::new(head, Vec::new())
    }

    /// `(head` on its own line, children indented by two spaces, closing
    /// parentheses at the end of the last line.
    pub(crate) fn render_sexpr(&self) -> String {
        let mut out = String::new();
        self.sexpr_into(0, &mut out);
        out.push('\n');
        out
    }

    fn sexpr_into(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push('(');
        out.push_str(&self.head);
        for child in &self.children {
            out.push('\n');
            child.sexpr_into(depth + 1, out);
        }
        out.push(')');
    }

    /// One node per line, children indented by two spaces, no brackets.
    pub(crate) fn render_indented(&self) -> String {
        let mut out = String::new();
        self.indented_into(0, &mut out);
        out
    }

    fn indented_into(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&self.head);
        out.push('\n');
        for child in &self.children {
            child.indented_into(depth + 1, out);
        }
    }
}
