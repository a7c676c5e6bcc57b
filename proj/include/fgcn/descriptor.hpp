#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgcn/dataset.hpp"
#include "fgcn/errors.hpp"
#include "fgcn/gcn.hpp"

namespace fgcn {

// Conventions baked into a battery descriptor. Models refuse descriptors
// built under a different convention, so the hash participates in every
// predict call.
struct DescriptorConvention {
    enum class SeparatorEncoding { Scalar, OneHot } separator_encoding = SeparatorEncoding::Scalar;
    double mol_divisor = 100.0;      // mol% -> fraction
    double loading_divisor = 100.0;  // LiI wt% -> fraction
    std::uint64_t gcn_version = 0;

    std::size_t length() const {
        return kConstituentCount * kGrWidth + 1 +
               (separator_encoding == SeparatorEncoding::Scalar ? 1 : 2);
    }

    std::string canonical() const {
        return "sep=" + std::string(separator_encoding == SeparatorEncoding::Scalar ? "scalar" : "onehot") +
               ";mol_div=" + format_double(mol_divisor) + ";load_div=" + format_double(loading_divisor) +
               ";gcn=" + std::to_string(gcn_version);
    }

    std::uint64_t hash() const { return fnv1a(canonical()); }
};

struct DescriptorVector {
    std::vector<double> values;
    std::uint64_t convention_hash = 0;
};

// Concatenates the 8 composition-scaled graph representations with the
// cell-level features: segment k = (mol%_k / mol_divisor) * GR_k, then
// loading / loading_divisor, then the separator class feature(s).
inline DescriptorVector build_descriptor(const FormulationDesign& design, const GrTable& grs,
                                         const DescriptorConvention& convention) {
    design.validate();
    for (std::size_t k = 0; k < kConstituentCount; ++k)
        if (grs[k].size() != kGrWidth)
            throw config_error("build_descriptor: GR " + std::to_string(k) + " has length " +
                               std::to_string(grs[k].size()) + ", expected " + std::to_string(kGrWidth));

    DescriptorVector out;
    out.convention_hash = convention.hash();
    out.values.reserve(convention.length());
    for (std::size_t k = 0; k < kConstituentCount; ++k) {
        const double scale = design.mol_percent[k] / convention.mol_divisor;
        for (double g : grs[k]) out.values.push_back(scale * g);
    }
    out.values.push_back(design.loading_wtpct / convention.loading_divisor);
    if (convention.separator_encoding == DescriptorConvention::SeparatorEncoding::Scalar) {
        out.values.push_back(static_cast<double>(static_cast<int>(design.separator)));
    } else {
        out.values.push_back(design.separator == Separator::Celgard ? 1.0 : 0.0);
        out.values.push_back(design.separator == Separator::Qma ? 1.0 : 0.0);
    }
    return out;
}

}  // namespace fgcn
