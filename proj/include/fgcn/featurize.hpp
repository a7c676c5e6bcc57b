#pragma once

#include <array>
#include <cmath>
#include <string>

#include "fgcn/matrix.hpp"
#include "fgcn/smiles.hpp"

namespace fgcn {

// Width of the per-atom feature vector produced by featurize().
inline constexpr std::size_t kNodeFeatureWidth = 15;

struct FeaturizedGraph {
    Matrix node_features;  // n_atoms x kNodeFeatureWidth
    Matrix adjacency;      // n_atoms x n_atoms, symmetric-normalized with self-loops
};

namespace detail {

// one-hot slot; anything outside the list lands on "other"
inline std::size_t element_slot(const std::string& element) {
    static const std::array<const char*, 9> known = {"B", "C", "N", "O", "F", "S", "Cl", "I", "Li"};
    for (std::size_t i = 0; i < known.size(); ++i)
        if (element == known[i]) return i;
    return known.size();  // other
}

}  // namespace detail

// Node features: element one-hot over {B,C,N,O,F,S,Cl,I,Li,other}, formal
// charge, degree/4, in-ring flag, explicit-H count/4, incident bond-order
// sum/4. Adjacency: D^(-1/2) (A + I) D^(-1/2) with D the degree matrix of
// A + I.
inline FeaturizedGraph featurize(const MolecularGraph& graph) {
    const std::size_t n = graph.atoms.size();
    FeaturizedGraph fg;
    fg.node_features = Matrix(n, kNodeFeatureWidth);

    std::vector<double> bond_order_sum(n, 0.0);
    for (const Bond& b : graph.bonds) {
        bond_order_sum[b.a] += b.order;
        bond_order_sum[b.b] += b.order;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const Atom& atom = graph.atoms[i];
        fg.node_features(i, detail::element_slot(atom.element)) = 1.0;
        fg.node_features(i, 10) = static_cast<double>(atom.formal_charge);
        fg.node_features(i, 11) = static_cast<double>(atom.degree) / 4.0;
        fg.node_features(i, 12) = atom.in_ring ? 1.0 : 0.0;
        fg.node_features(i, 13) = static_cast<double>(atom.explicit_hydrogens) / 4.0;
        fg.node_features(i, 14) = bond_order_sum[i] / 4.0;
    }

    Matrix a_plus_i(n, n);
    for (std::size_t i = 0; i < n; ++i) a_plus_i(i, i) = 1.0;
    for (const Bond& b : graph.bonds) {
        a_plus_i(b.a, b.b) = 1.0;
        a_plus_i(b.b, b.a) = 1.0;
    }

    std::vector<double> inv_sqrt_degree(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += a_plus_i(i, j);
        inv_sqrt_degree[i] = 1.0 / std::sqrt(deg);
    }

    fg.adjacency = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            fg.adjacency(i, j) = inv_sqrt_degree[i] * a_plus_i(i, j) * inv_sqrt_degree[j];
    return fg;
}

// Relabels atoms: atom i of the input becomes atom perm[i] of the output.
// Used by permutation-invariance tests.
inline MolecularGraph permute_atoms(const MolecularGraph& graph, const std::vector<std::size_t>& perm) {
    if (perm.size() != graph.atoms.size())
        throw config_error("permute_atoms: permutation length " + std::to_string(perm.size()) +
                           " for " + std::to_string(graph.atoms.size()) + " atoms");
    MolecularGraph out;
    out.atoms.resize(graph.atoms.size());
    for (std::size_t i = 0; i < graph.atoms.size(); ++i) out.atoms[perm[i]] = graph.atoms[i];
    out.bonds.reserve(graph.bonds.size());
    for (const Bond& b : graph.bonds) {
        const std::size_t pa = perm[b.a], pb = perm[b.b];
        out.bonds.push_back(Bond{std::min(pa, pb), std::max(pa, pb), b.order});
    }
    out.fragment_count = graph.fragment_count;
    return out;
}

}  // namespace fgcn
