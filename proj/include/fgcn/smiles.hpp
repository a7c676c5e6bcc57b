#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fgcn/errors.hpp"

namespace fgcn {

struct Atom {
    std::string element;
    int formal_charge = 0;
    int explicit_hydrogens = 0;
    bool in_ring = false;
    int degree = 0;

    bool operator==(const Atom& o) const = default;
};

struct Bond {
    std::size_t a = 0;  // lower atom index
    std::size_t b = 0;  // higher atom index
    int order = 1;      // 1, 2 or 3

    bool operator==(const Bond& o) const = default;
};

struct MolecularGraph {
    std::vector<Atom> atoms;
    std::vector<Bond> bonds;
    std::size_t fragment_count = 0;

    bool operator==(const MolecularGraph& o) const = default;

    std::size_t ring_count() const {
        // cyclomatic number: bonds - atoms + components
        return bonds.size() + fragment_count - atoms.size();
    }
};

namespace detail {

inline const std::set<std::string>& element_table() {
    static const std::set<std::string> table = {
        "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al",
        "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Ti", "Cr", "Mn", "Fe", "Co", "Ni",
        "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Zr", "Mo", "Ru",
        "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "W",
        "Pt", "Au", "Hg", "Tl", "Pb", "Bi"};
    return table;
}

class SmilesParser {
  public:
    explicit SmilesParser(const std::string& text) : text_(text) {}

    MolecularGraph parse() {
        if (text_.empty()) fail(0, "empty SMILES");
        for (std::size_t i = 0; i < text_.size(); ++i) {
            const unsigned char c = static_cast<unsigned char>(text_[i]);
            if (c > 127) fail(i, "non-ASCII byte");
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') fail(i, "whitespace not allowed");
        }

        while (pos_ < text_.size()) step();

        if (pending_bond_ != 0) fail(text_.size(), "dangling bond at end of input");
        if (!branch_stack_.empty()) fail(text_.size(), "unbalanced parentheses: unclosed '('");
        if (!open_rings_.empty()) {
            const auto& [digit, open] = *open_rings_.begin();
            fail(open.offset, "ring bond " + std::to_string(digit) + " never closed");
        }
        if (graph_.atoms.empty()) fail(0, "no atoms");

        finalize();
        return graph_;
    }

  private:
    struct OpenRing {
        std::size_t atom;
        int bond_order;  // 0 = unspecified
        std::size_t offset;
    };

    void step() {
        const char c = text_[pos_];
        switch (c) {
            case '-': case '=': case '#':
                if (pending_bond_ != 0) fail(pos_, "two bond symbols in a row");
                pending_bond_ = (c == '-') ? 1 : (c == '=') ? 2 : 3;
                ++pos_;
                return;
            case '/': case '\\':
                fail(pos_, "stereo bond markers not supported");
                return;
            case ':':
                fail(pos_, "aromatic bonds not supported");
                return;
            case '.':
                if (pending_bond_ != 0) fail(pos_, "bond symbol before '.'");
                if (prev_ == kNone) fail(pos_, "'.' before any atom");
                prev_ = kNone;
                ++pos_;
                return;
            case '(':
                if (prev_ == kNone) fail(pos_, "branch with no preceding atom");
                if (pending_bond_ != 0) fail(pos_, "bond symbol before '('");
                branch_stack_.push_back(prev_);
                ++pos_;
                return;
            case ')':
                if (branch_stack_.empty()) fail(pos_, "unbalanced parentheses: ')' without '('");
                if (pending_bond_ != 0) fail(pos_, "dangling bond before ')'");
                prev_ = branch_stack_.back();
                branch_stack_.pop_back();
                ++pos_;
                return;
            case '%': {
                if (pos_ + 2 >= text_.size() || !is_digit(text_[pos_ + 1]) || !is_digit(text_[pos_ + 2]))
                    fail(pos_, "'%' must be followed by two digits");
                const int digit = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
                ring_bond(digit, pos_);
                pos_ += 3;
                return;
            }
            case '[':
                atom_done(parse_bracket_atom());
                return;
            default:
                if (is_digit(c)) {
                    if (prev_ == kNone) fail(pos_, "ring closure digit before any atom");
                    ring_bond(c - '0', pos_);
                    ++pos_;
                    return;
                }
                atom_done(parse_organic_atom());
                return;
        }
    }

    Atom parse_organic_atom() {
        const char c = text_[pos_];
        if (c >= 'a' && c <= 'z') fail(pos_, "aromatic (lowercase) atoms not supported");
        // two-letter organic-subset symbols first
        if (pos_ + 1 < text_.size()) {
            const std::string two = text_.substr(pos_, 2);
            if (two == "Cl" || two == "Br") {
                pos_ += 2;
                Atom a;
                a.element = two;
                return a;
            }
        }
        static const std::string organic = "BCNOPSFI";
        if (organic.find(c) == std::string::npos)
            fail(pos_, std::string("unknown element symbol '") + c + "' outside brackets");
        ++pos_;
        Atom a;
        a.element = std::string(1, c);
        return a;
    }

    Atom parse_bracket_atom() {
        const std::size_t open = pos_;
        ++pos_;  // consume '['
        if (pos_ < text_.size() && is_digit(text_[pos_])) fail(pos_, "isotope labels not supported");

        Atom a;
        if (pos_ >= text_.size() || !(text_[pos_] >= 'A' && text_[pos_] <= 'Z')) {
            if (pos_ < text_.size() && text_[pos_] >= 'a' && text_[pos_] <= 'z')
                fail(pos_, "aromatic (lowercase) atoms not supported");
            fail(pos_, "expected element symbol after '['");
        }
        std::string symbol(1, text_[pos_]);
        ++pos_;
        if (pos_ < text_.size() && text_[pos_] >= 'a' && text_[pos_] <= 'z') {
            const std::string two = symbol + text_[pos_];
            if (element_table().count(two)) {
                symbol = two;
                ++pos_;
            }
        }
        if (!element_table().count(symbol)) fail(open + 1, "unknown element symbol '" + symbol + "'");
        a.element = symbol;

        if (pos_ < text_.size() && (text_[pos_] == '@')) fail(pos_, "stereo markers not supported");

        if (pos_ < text_.size() && text_[pos_] == 'H') {
            ++pos_;
            a.explicit_hydrogens = 1;
            if (pos_ < text_.size() && is_digit(text_[pos_])) {
                a.explicit_hydrogens = 0;
                while (pos_ < text_.size() && is_digit(text_[pos_]))
                    a.explicit_hydrogens = a.explicit_hydrogens * 10 + (text_[pos_++] - '0');
            }
        }

        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
            const char sign_char = text_[pos_];
            const int sign = sign_char == '+' ? 1 : -1;
            int magnitude = 1;
            ++pos_;
            if (pos_ < text_.size() && is_digit(text_[pos_])) {
                magnitude = 0;
                while (pos_ < text_.size() && is_digit(text_[pos_]))
                    magnitude = magnitude * 10 + (text_[pos_++] - '0');
            } else {
                while (pos_ < text_.size() && text_[pos_] == sign_char) {
                    ++magnitude;
                    ++pos_;
                }
            }
            a.formal_charge = sign * magnitude;
        }

        if (pos_ >= text_.size()) fail(open, "unterminated bracket atom");
        if (text_[pos_] != ']')
            fail(pos_, std::string("unexpected character '") + text_[pos_] + "' in bracket atom");
        ++pos_;
        return a;
    }

    void atom_done(Atom atom) {
        graph_.atoms.push_back(std::move(atom));
        const std::size_t idx = graph_.atoms.size() - 1;
        if (prev_ != kNone) add_bond(prev_, idx, pending_bond_ == 0 ? 1 : pending_bond_, pos_);
        pending_bond_ = 0;
        prev_ = idx;
    }

    void ring_bond(int digit, std::size_t offset) {
        if (prev_ == kNone) fail(offset, "ring closure with no preceding atom");
        auto it = open_rings_.find(digit);
        if (it == open_rings_.end()) {
            open_rings_[digit] = OpenRing{prev_, pending_bond_, offset};
            pending_bond_ = 0;
            return;
        }
        const OpenRing open = it->second;
        open_rings_.erase(it);
        if (open.atom == prev_) fail(offset, "ring bond " + std::to_string(digit) + " closes on its own atom");
        int order = 1;
        if (open.bond_order != 0 && pending_bond_ != 0 && open.bond_order != pending_bond_)
            fail(offset, "conflicting bond orders on ring bond " + std::to_string(digit));
        if (open.bond_order != 0) order = open.bond_order;
        if (pending_bond_ != 0) order = pending_bond_;
        pending_bond_ = 0;
        add_bond(open.atom, prev_, order, offset);
    }

    void add_bond(std::size_t i, std::size_t j, int order, std::size_t offset) {
        const Bond bond{std::min(i, j), std::max(i, j), order};
        for (const Bond& existing : graph_.bonds)
            if (existing.a == bond.a && existing.b == bond.b)
                fail(offset, "duplicate bond between atoms " + std::to_string(bond.a) + " and " +
                                 std::to_string(bond.b));
        graph_.bonds.push_back(bond);
    }

    // degree, fragment count and ring membership
    void finalize() {
        const std::size_t n = graph_.atoms.size();
        for (const Bond& b : graph_.bonds) {
            graph_.atoms[b.a].degree += 1;
            graph_.atoms[b.b].degree += 1;
        }

        std::vector<std::size_t> parent(n);
        for (std::size_t i = 0; i < n; ++i) parent[i] = i;
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const Bond& b : graph_.bonds) parent[find(b.a)] = find(b.b);
        std::set<std::size_t> roots;
        for (std::size_t i = 0; i < n; ++i) roots.insert(find(i));
        graph_.fragment_count = roots.size();

        // a bond lies on a cycle iff its endpoints stay connected without it;
        // graphs here are tiny, so the direct check is fine
        for (std::size_t bi = 0; bi < graph_.bonds.size(); ++bi) {
            if (connected_without(graph_.bonds[bi].a, graph_.bonds[bi].b, bi)) {
                graph_.atoms[graph_.bonds[bi].a].in_ring = true;
                graph_.atoms[graph_.bonds[bi].b].in_ring = true;
            }
        }
    }

    bool connected_without(std::size_t from, std::size_t to, std::size_t skip_bond) const {
        std::vector<bool> seen(graph_.atoms.size(), false);
        std::vector<std::size_t> stack{from};
        seen[from] = true;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            if (u == to) return true;
            for (std::size_t bi = 0; bi < graph_.bonds.size(); ++bi) {
                if (bi == skip_bond) continue;
                const Bond& b = graph_.bonds[bi];
                std::size_t v;
                if (b.a == u) v = b.b;
                else if (b.b == u) v = b.a;
                else continue;
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return false;
    }

    [[noreturn]] void fail(std::size_t offset, const std::string& reason) const {
        throw parse_error("SMILES parse error at byte " + std::to_string(offset) + ": " + reason);
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    const std::string& text_;
    std::size_t pos_ = 0;
    MolecularGraph graph_;
    std::size_t prev_ = kNone;
    int pending_bond_ = 0;  // 0 = no pending symbol
    std::vector<std::size_t> branch_stack_;
    std::map<int, OpenRing> open_rings_;
};

}  // namespace detail

// Parses the SMILES subset used by this project: organic-subset atoms,
// bracket atoms with charge and H-count, bond orders - = #, branches, ring
// closures (including %nn) and dot-separated fragments. Aromatic lowercase
// atoms, stereochemistry and isotopes are rejected.
inline MolecularGraph parse_smiles(const std::string& text) {
    return detail::SmilesParser(text).parse();
}

}  // namespace fgcn
