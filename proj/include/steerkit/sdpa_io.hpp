#pragma once

// Sparse SDPA (.dat-s) writer and a matching reader.
//
// SDPA's standard form is  min c'x  s.t.  sum_i x_i F_i - F0 >= 0, so our
// constant blocks flip sign on export.  Hermitian blocks with complex
// entries are embedded as real symmetric 2m x 2m blocks; equality rows
// become paired diagonal slack entries (a'x - b >= 0 and b - a'x >= 0) in
// one trailing diagonal block.  A constant objective offset survives the
// trip inside a leading comment line.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <steerkit/sdp.hpp>

namespace steerkit {

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct SdpaEntry {
    int mat, blk, i, j;  // 1-based, i <= j
    double v;
};

// Real symmetric upper-triangle entries for one Hermitian coefficient
// matrix, applying the complex embedding when needed.
inline std::vector<std::pair<std::pair<int, int>, double>> sdpa_entries(
    const std::vector<SdpEntry>& herm, int n, bool realBlock) {
    std::vector<std::pair<std::pair<int, int>, double>> out;
    for (const SdpEntry& e : herm) {
        double re = e.v.real(), im = e.v.imag();
        if (realBlock) {
            if (re != 0.0) out.push_back({{e.p, e.q}, re});
        } else {
            if (re != 0.0) {
                out.push_back({{e.p, e.q}, re});
                out.push_back({{e.p + n, e.q + n}, re});
            }
            // upper-triangle representative of the skew pair: (p, q+n) = -im
            if (im != 0.0) out.push_back({{e.p, e.q + n}, -im});
            if (im != 0.0 && e.p != e.q) out.push_back({{e.q, e.p + n}, im});
        }
    }
    return out;
}

}  // namespace detail

inline void export_sdpa(const SdpProblem& p, std::ostream& os) {
    using detail::fmt_g17;
    std::vector<bool> realBlock(p.blocks.size());
    std::vector<int> outSize(p.blocks.size());
    for (size_t k = 0; k < p.blocks.size(); ++k) {
        realBlock[k] = detail::block_is_real(p.blocks[k]);
        outSize[k] = realBlock[k] ? p.blocks[k].size : 2 * p.blocks[k].size;
    }
    int nEq = static_cast<int>(p.equalities.size());
    int nBlock = static_cast<int>(p.blocks.size()) + (nEq > 0 ? 1 : 0);

    if (p.objConstant != 0.0) os << "*offset " << fmt_g17(p.objConstant) << "\n";
    os << p.nVars << "\n" << nBlock << "\n";
    for (size_t k = 0; k < p.blocks.size(); ++k)
        os << (p.blocks[k].diagonal ? -outSize[k] : outSize[k])
           << (k + 1 < p.blocks.size() || nEq ? " " : "");
    if (nEq > 0) os << -2 * nEq;
    os << "\n";
    for (int j = 0; j < p.nVars; ++j) os << fmt_g17(p.c[j]) << (j + 1 < p.nVars ? " " : "");
    os << "\n";

    auto emit = [&os](int mat, int blk, int i, int j, double v) {
        if (v == 0.0) return;
        os << mat << " " << blk << " " << i + 1 << " " << j + 1 << " " << fmt_g17(v) << "\n";
    };
    for (size_t k = 0; k < p.blocks.size(); ++k) {
        const SdpBlock& b = p.blocks[k];
        int blkNo = static_cast<int>(k) + 1;
        for (auto& [ij, v] : detail::sdpa_entries(b.f0, b.size, realBlock[k]))
            emit(0, blkNo, ij.first, ij.second, -v);  // F0^sdpa = -F0^ours
        for (const auto& [var, es] : b.coeff)
            for (auto& [ij, v] : detail::sdpa_entries(es, b.size, realBlock[k]))
                emit(var + 1, blkNo, ij.first, ij.second, v);
    }
    for (int r = 0; r < nEq; ++r) {
        const EqualityRow& row = p.equalities[r];
        emit(0, nBlock, 2 * r, 2 * r, row.rhs);
        emit(0, nBlock, 2 * r + 1, 2 * r + 1, -row.rhs);
        for (auto [j, a] : row.terms) {
            emit(j + 1, nBlock, 2 * r, 2 * r, a);
            emit(j + 1, nBlock, 2 * r + 1, 2 * r + 1, -a);
        }
    }
}

/// Reads a sparse SDPA file back into the real inequality-form IR (complex
/// structure and equality rows do not round-trip as such; they come back as
/// the real blocks the writer produced).
inline SdpProblem import_sdpa(std::istream& is) {
    SdpProblem p;
    std::string line;
    double offset = 0.0;
    auto next_data_line = [&](std::string& out) -> bool {
        while (std::getline(is, out)) {
            if (out.empty()) continue;
            if (out[0] == '*' || out[0] == '"') {
                std::istringstream ls(out.substr(1));
                std::string key;
                if (ls >> key && key == "offset") ls >> offset;
                continue;
            }
            return true;
        }
        return false;
    };
    int mdim = 0, nblock = 0;
    if (!next_data_line(line)) throw std::runtime_error("sdpa: missing mDIM");
    mdim = std::stoi(line);
    if (!next_data_line(line)) throw std::runtime_error("sdpa: missing nBLOCK");
    nblock = std::stoi(line);
    if (!next_data_line(line)) throw std::runtime_error("sdpa: missing block sizes");
    std::vector<int> sizes;
    {
        std::istringstream ls(line);
        int v;
        char c;
        while (ls >> v) {
            sizes.push_back(v);
            ls >> std::ws;
            while (ls.peek() == ',' || ls.peek() == '(' || ls.peek() == ')' || ls.peek() == '{' ||
                   ls.peek() == '}') ls.get(c);
        }
    }
    if (static_cast<int>(sizes.size()) != nblock) throw std::runtime_error("sdpa: block count mismatch");
    if (!next_data_line(line)) throw std::runtime_error("sdpa: missing objective");
    p.objConstant = offset;
    {
        std::istringstream ls(line);
        double v;
        while (ls >> v) p.add_var(v);
    }
    if (p.nVars != mdim) throw std::runtime_error("sdpa: objective length mismatch");
    for (int k = 0; k < nblock; ++k)
        p.add_block("blk" + std::to_string(k + 1), std::abs(sizes[k]), sizes[k] < 0);
    while (next_data_line(line)) {
        std::istringstream ls(line);
        int mat, blk, i, j;
        double v;
        if (!(ls >> mat >> blk >> i >> j >> v)) continue;
        if (sizes[blk - 1] < 0 && i != j) throw std::runtime_error("sdpa: off-diagonal in diagonal block");
        if (mat == 0)
            p.set_f0(blk - 1, i - 1, j - 1, -v);
        else
            p.add_coeff(blk - 1, mat - 1, i - 1, j - 1, v);
    }
    return p;
}

}  // namespace steerkit
