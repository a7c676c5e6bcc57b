#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fgcn/errors.hpp"
#include "fgcn/matrix.hpp"

namespace fgcn {

// Named parameter blocks with matching gradient storage. One ParamSet holds
// all weights of one model; the tape accumulates gradients into it.
class ParamSet {
  public:
    struct Block {
        std::string name;
        Matrix value;
        Matrix grad;
    };

    int add(std::string name, Matrix init) {
        Block b;
        b.name = std::move(name);
        b.grad = Matrix(init.rows(), init.cols());
        b.value = std::move(init);
        blocks_.push_back(std::move(b));
        return static_cast<int>(blocks_.size()) - 1;
    }

    std::size_t block_count() const { return blocks_.size(); }

    Block& block(int id) { return blocks_[static_cast<std::size_t>(id)]; }
    const Block& block(int id) const { return blocks_[static_cast<std::size_t>(id)]; }

    std::vector<Block>& blocks() { return blocks_; }
    const std::vector<Block>& blocks() const { return blocks_; }

    void zero_grads() {
        for (auto& b : blocks_) b.grad.fill(0.0);
    }

    std::size_t total_parameters() const {
        std::size_t n = 0;
        for (const auto& b : blocks_) n += b.value.size();
        return n;
    }

  private:
    std::vector<Block> blocks_;
};

// Handle into a GradientTape.
struct Var {
    int id = -1;
};

// Reverse-mode tape over the primitives this pipeline needs: affine layers,
// ReLU, mean-pool over rows, column concatenation, scalar scaling and MSE
// loss. Forward values are computed eagerly; backward() walks the recorded
// operations in exact reverse order and accumulates parameter gradients into
// the owning ParamSet.
class GradientTape {
  public:
    Var constant(Matrix value) { return push(Op::Constant, {}, std::move(value)); }

    Var parameter(ParamSet& params, int block_id) {
        Node node;
        node.op = Op::Param;
        node.params = &params;
        node.block = block_id;
        nodes_.push_back(std::move(node));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    // x*W + b with b broadcast over the rows of x.
    Var affine(Var x, Var w, Var b) {
        const Matrix& xv = value(x);
        const Matrix& wv = value(w);
        const Matrix& bv = value(b);
        if (xv.cols() != wv.rows())
            throw shape_error("affine: x is " + xv.dims() + " but W is " + wv.dims());
        if (bv.rows() != 1 || bv.cols() != wv.cols())
            throw shape_error("affine: b is " + bv.dims() + " but W is " + wv.dims());
        Matrix out = fgcn::matmul(xv, wv);
        for (std::size_t r = 0; r < out.rows(); ++r) {
            double* orow = out.row_ptr(r);
            const double* brow = bv.row_ptr(0);
            for (std::size_t c = 0; c < out.cols(); ++c) orow[c] += brow[c];
        }
        return push(Op::Affine, {x.id, w.id, b.id}, std::move(out));
    }

    Var matmul(Var a, Var b) {
        const Matrix& av = value(a);
        const Matrix& bv = value(b);
        if (av.cols() != bv.rows())
            throw shape_error("matmul: left is " + av.dims() + " but right is " + bv.dims());
        return push(Op::MatMul, {a.id, b.id}, fgcn::matmul(av, bv));
    }

    Var relu(Var x) {
        Matrix out = value(x);
        for (std::size_t i = 0; i < out.size(); ++i)
            if (out.data()[i] < 0.0) out.data()[i] = 0.0;
        return push(Op::Relu, {x.id}, std::move(out));
    }

    // Column-wise mean over rows: (n x c) -> (1 x c).
    Var mean_rows(Var x) {
        const Matrix& xv = value(x);
        if (xv.rows() == 0) throw shape_error("mean_rows: empty input");
        Matrix out(1, xv.cols());
        for (std::size_t r = 0; r < xv.rows(); ++r) {
            const double* row = xv.row_ptr(r);
            for (std::size_t c = 0; c < xv.cols(); ++c) out(0, c) += row[c];
        }
        const double inv = 1.0 / static_cast<double>(xv.rows());
        for (std::size_t c = 0; c < xv.cols(); ++c) out(0, c) *= inv;
        return push(Op::MeanRows, {x.id}, std::move(out));
    }

    Var scale(Var x, double factor) {
        Matrix out = factor * value(x);
        Var v = push(Op::Scale, {x.id}, std::move(out));
        nodes_.back().aux = factor;
        return v;
    }

    Var add(Var a, Var b) {
        return push(Op::Add, {a.id, b.id}, value(a) + value(b));
    }

    Var concat_cols(const std::vector<Var>& parts) {
        if (parts.empty()) throw shape_error("concat_cols: no inputs");
        const std::size_t rows = value(parts[0]).rows();
        std::size_t cols = 0;
        for (Var p : parts) {
            if (value(p).rows() != rows)
                throw shape_error("concat_cols: row mismatch, " + value(parts[0]).dims() + " vs " +
                                  value(p).dims());
            cols += value(p).cols();
        }
        Matrix out(rows, cols);
        std::size_t offset = 0;
        for (Var p : parts) {
            const Matrix& pv = value(p);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < pv.cols(); ++c) out(r, offset + c) = pv(r, c);
            offset += pv.cols();
        }
        std::vector<int> ids;
        ids.reserve(parts.size());
        for (Var p : parts) ids.push_back(p.id);
        return push(Op::ConcatCols, std::move(ids), std::move(out));
    }

    // Mean squared error over all entries of pred vs target.
    Var mse(Var pred, Var target) {
        const Matrix& pv = value(pred);
        const Matrix& tv = value(target);
        if (!pv.same_shape(tv))
            throw shape_error("mse: pred is " + pv.dims() + " but target is " + tv.dims());
        double acc = 0.0;
        for (std::size_t i = 0; i < pv.size(); ++i) {
            const double d = pv.data()[i] - tv.data()[i];
            acc += d * d;
        }
        Matrix out(1, 1);
        out(0, 0) = acc / static_cast<double>(pv.size());
        return push(Op::Mse, {pred.id, target.id}, std::move(out));
    }

    const Matrix& value(Var v) const {
        check_var(v);
        const Node& n = nodes_[static_cast<std::size_t>(v.id)];
        return n.op == Op::Param ? n.params->block(n.block).value : n.value;
    }

    double scalar(Var v) const {
        const Matrix& m = value(v);
        if (m.rows() != 1 || m.cols() != 1) throw shape_error("scalar: node is " + m.dims());
        return m(0, 0);
    }

    // Seeds d(loss)/d(loss) = loss_seed and propagates through every recorded
    // operation in reverse order. Parameter gradients of every referenced
    // ParamSet are reset first, then accumulated.
    void backward(Var loss, double loss_seed = 1.0) {
        if (nodes_.empty()) throw state_error("backward: no forward pass recorded");
        if (consumed_) throw state_error("backward: tape already consumed; record a new forward pass");
        check_var(loss);
        {
            const Matrix& lv = value(loss);
            if (lv.rows() != 1 || lv.cols() != 1)
                throw state_error("backward: loss node is " + lv.dims() + ", expected 1x1 scalar");
        }

        // Param nodes alias their ParamSet gradient so layer backwards write
        // straight into it; everything else gets tape-local storage.
        for (auto& n : nodes_) {
            if (n.op == Op::Param)
                n.params->block(n.block).grad.fill(0.0);
            else
                n.grad = Matrix(value_of(n).rows(), value_of(n).cols());
        }
        grad_at(loss.id)(0, 0) = loss_seed;

        for (int id = loss.id; id >= 0; --id) {
            Node& n = nodes_[static_cast<std::size_t>(id)];
            const Matrix& g = grad_at(id);
            switch (n.op) {
                case Op::Constant:
                case Op::Param:
                    break;
                case Op::Affine: {
                    const Matrix& xv = value_at(n.in[0]);
                    const Matrix& wv = value_at(n.in[1]);
                    matmul_bt_accumulate(grad_at(n.in[0]), g, wv);
                    matmul_at_accumulate(grad_at(n.in[1]), xv, g);
                    Matrix& gb = grad_at(n.in[2]);
                    for (std::size_t r = 0; r < g.rows(); ++r) {
                        const double* grow = g.row_ptr(r);
                        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += grow[c];
                    }
                    break;
                }
                case Op::MatMul: {
                    matmul_bt_accumulate(grad_at(n.in[0]), g, value_at(n.in[1]));
                    matmul_at_accumulate(grad_at(n.in[1]), value_at(n.in[0]), g);
                    break;
                }
                case Op::Relu: {
                    const Matrix& xv = value_at(n.in[0]);
                    Matrix& gx = grad_at(n.in[0]);
                    for (std::size_t i = 0; i < gx.size(); ++i)
                        if (xv.data()[i] > 0.0) gx.data()[i] += g.data()[i];
                    break;
                }
                case Op::MeanRows: {
                    Matrix& gx = grad_at(n.in[0]);
                    const double inv = 1.0 / static_cast<double>(gx.rows());
                    for (std::size_t r = 0; r < gx.rows(); ++r)
                        for (std::size_t c = 0; c < gx.cols(); ++c) gx(r, c) += g(0, c) * inv;
                    break;
                }
                case Op::Scale: {
                    Matrix& gx = grad_at(n.in[0]);
                    for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] += n.aux * g.data()[i];
                    break;
                }
                case Op::Add: {
                    Matrix& ga = grad_at(n.in[0]);
                    Matrix& gb = grad_at(n.in[1]);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        ga.data()[i] += g.data()[i];
                        gb.data()[i] += g.data()[i];
                    }
                    break;
                }
                case Op::ConcatCols: {
                    std::size_t offset = 0;
                    for (int in_id : n.in) {
                        Matrix& gp = grad_at(in_id);
                        for (std::size_t r = 0; r < gp.rows(); ++r)
                            for (std::size_t c = 0; c < gp.cols(); ++c) gp(r, c) += g(r, offset + c);
                        offset += gp.cols();
                    }
                    break;
                }
                case Op::Mse: {
                    const Matrix& pv = value_at(n.in[0]);
                    const Matrix& tv = value_at(n.in[1]);
                    Matrix& gp = grad_at(n.in[0]);
                    Matrix& gt = grad_at(n.in[1]);
                    const double s = 2.0 * g(0, 0) / static_cast<double>(pv.size());
                    for (std::size_t i = 0; i < pv.size(); ++i) {
                        const double d = s * (pv.data()[i] - tv.data()[i]);
                        gp.data()[i] += d;
                        gt.data()[i] -= d;
                    }
                    break;
                }
            }
        }
        consumed_ = true;
    }

    const Matrix& grad(Var v) const {
        check_var(v);
        const Node& n = nodes_[static_cast<std::size_t>(v.id)];
        return n.op == Op::Param ? n.params->block(n.block).grad : n.grad;
    }

    void reset() {
        nodes_.clear();
        consumed_ = false;
    }

    std::size_t op_count() const { return nodes_.size(); }

    // Hash of every ReLU activation pattern on the tape. Finite-difference
    // harnesses compare it across perturbed evaluations: a changed mask means
    // the step straddled a kink and the central difference is invalid there.
    std::uint64_t relu_mask_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const Node& n : nodes_) {
            if (n.op != Op::Relu) continue;
            for (std::size_t i = 0; i < n.value.size(); ++i) {
                const unsigned char bit = n.value.data()[i] > 0.0 ? 1 : 0;
                h ^= bit;
                h *= 0x100000001b3ULL;
            }
        }
        return h;
    }

  private:
    enum class Op { Constant, Param, Affine, MatMul, Relu, MeanRows, Scale, Add, ConcatCols, Mse };

    struct Node {
        Op op = Op::Constant;
        std::vector<int> in;
        Matrix value;
        Matrix grad;
        double aux = 0.0;
        ParamSet* params = nullptr;
        int block = -1;
    };

    Var push(Op op, std::vector<int> in, Matrix value) {
        if (consumed_) throw state_error("tape already consumed; call reset() before recording again");
        Node node;
        node.op = op;
        node.in = std::move(in);
        node.value = std::move(value);
        nodes_.push_back(std::move(node));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    void check_var(Var v) const {
        if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
            throw state_error("invalid tape handle " + std::to_string(v.id));
    }

    const Matrix& value_of(const Node& n) const {
        return n.op == Op::Param ? n.params->block(n.block).value : n.value;
    }

    const Matrix& value_at(int id) { return value_of(nodes_[static_cast<std::size_t>(id)]); }

    Matrix& grad_at(int id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        return n.op == Op::Param ? n.params->block(n.block).grad : n.grad;
    }

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace fgcn
