#pragma once

#include <array>
#include <string>
#include <vector>

#include "fgcn/smiles.hpp"

namespace fgcn {

inline constexpr std::size_t kConstituentCount = 8;

struct Constituent {
    std::string name;
    enum class Role { Salt, Solvent } role;
    std::string smiles;
    MolecularGraph graph;
};

// Fixed electrolyte registry, in the order used by every descriptor, CSV
// column set and report: 4 salts then 4 solvents.
inline const std::vector<Constituent>& canonical_constituents() {
    static const std::vector<Constituent> registry = [] {
        const std::array<std::array<std::string, 2>, kConstituentCount> salts_then_solvents = {{
            {"LiCl", "[Li+].[Cl-]"},
            {"LiNO3", "[Li+].[O-][N+](=O)[O-]"},
            {"LiBOB", "[Li+].[B-]12(OC(=O)C(=O)O1)OC(=O)C(=O)O2"},
            {"LiTFSI", "[Li+].[N-](S(=O)(=O)C(F)(F)F)S(=O)(=O)C(F)(F)F"},
            {"DOL", "C1COCO1"},
            {"DMI", "CN1CCN(C)C1=O"},
            {"EC", "O=C1OCCO1"},
            {"G4", "COCCOCCOCCOCCOC"},
        }};
        std::vector<Constituent> out;
        out.reserve(kConstituentCount);
        for (std::size_t i = 0; i < kConstituentCount; ++i) {
            Constituent c;
            c.name = salts_then_solvents[i][0];
            c.role = i < 4 ? Constituent::Role::Salt : Constituent::Role::Solvent;
            c.smiles = salts_then_solvents[i][1];
            c.graph = parse_smiles(c.smiles);
            out.push_back(std::move(c));
        }
        return out;
    }();
    return registry;
}

// CSV column names for the mol% of each registry constituent, same order.
inline const std::array<std::string, kConstituentCount>& mol_column_names() {
    static const std::array<std::string, kConstituentCount> names = {
        "mol_licl", "mol_lino3", "mol_libob", "mol_litfsi", "mol_dol", "mol_dmi", "mol_ec", "mol_g4"};
    return names;
}

}  // namespace fgcn
