#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <vector>

#include "uvtex/tensor.hpp"

namespace uvtex::ad {

// Define-by-run reverse-mode tape over dense tensors. Nodes are appended in
// topological order; backward walks the tape in reverse. Convolutions run as
// im2col + GEMM; the im2col buffer is rebuilt in the backward pass instead of
// being cached.
template <typename T>
class Graph {
public:
    using Tn = TensorT<T>;
    using MatCM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
    using MapRM =
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using CMapRM =
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    struct Node {
        Tn val;
        Tn grad; // empty until touched by backward
        bool needs_grad = false;
        std::function<void(Graph&)> back;
    };

    std::vector<Node> nodes;

    int leaf(Tn v, bool needs_grad = false) {
        nodes.push_back(Node{std::move(v), {}, needs_grad, nullptr});
        return static_cast<int>(nodes.size()) - 1;
    }

    const Tn& val(int id) const { return nodes[id].val; }

    Tn& grad(int id) {
        Node& n = nodes[id];
        if (n.grad.data.empty()) n.grad = Tn::zeros(n.val.shape);
        return n.grad;
    }

    bool touched(int id) const { return !nodes[id].grad.data.empty(); }

    void backward(int out) {
        check(nodes[out].val.numel() == 1, Err::ShapeMismatch,
              "backward seeds a scalar node");
        grad(out).data[0] = T(1);
        for (int i = out; i >= 0; --i) {
            if (nodes[i].back && touched(i) && nodes[i].needs_grad) nodes[i].back(*this);
        }
    }

    // ---- ops ----

    int conv2d(int x, int w, int b, int stride, int pad) {
        const Tn& xv = nodes[x].val;
        const Tn& wv = nodes[w].val;
        const int B = xv.dim(0), Ci = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        const int Co = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
        check(wv.dim(1) == Ci, Err::ShapeMismatch, "conv2d channel mismatch");
        const int Ho = (H + 2 * pad - kh) / stride + 1;
        const int Wo = (W + 2 * pad - kw) / stride + 1;
        const int K = Ci * kh * kw;
        const long N = static_cast<long>(B) * Ho * Wo;

        MatCM xc(K, N);
        im2col(xv, kh, kw, stride, pad, Ho, Wo, xc);
        CMapRM wm(wv.data.data(), Co, K);
        MatCM y = wm * xc;

        Tn out({B, Co, Ho, Wo});
        const Tn& bv = nodes[b].val;
        for (int bb = 0; bb < B; ++bb)
            for (int co = 0; co < Co; ++co) {
                T* dst = &out.at(bb, co, 0, 0);
                const long base = static_cast<long>(bb) * Ho * Wo;
                for (long j = 0; j < static_cast<long>(Ho) * Wo; ++j)
                    dst[j] = y(co, base + j) + bv[co];
            }

        int id = add_node(std::move(out), {x, w, b});
        nodes[id].back = [x, w, b, stride, pad, id](Graph& g) {
            const Tn& xv = g.nodes[x].val;
            const Tn& wv = g.nodes[w].val;
            const Tn& gy = g.nodes[id].grad;
            const int B = xv.dim(0), Ci = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
            const int Co = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
            const int Ho = gy.dim(2), Wo = gy.dim(3);
            const int K = Ci * kh * kw;
            const long N = static_cast<long>(B) * Ho * Wo;

            MatCM gym(Co, N);
            for (int bb = 0; bb < B; ++bb)
                for (int co = 0; co < Co; ++co) {
                    const T* src = &gy.at(bb, co, 0, 0);
                    const long base = static_cast<long>(bb) * Ho * Wo;
                    for (long j = 0; j < static_cast<long>(Ho) * Wo; ++j)
                        gym(co, base + j) = src[j];
                }

            if (g.nodes[b].needs_grad) {
                Tn& gb = g.grad(b);
                for (int co = 0; co < Co; ++co) gb[co] += gym.row(co).sum();
            }
            if (g.nodes[w].needs_grad) {
                MatCM xc(K, N);
                im2col(xv, kh, kw, stride, pad, Ho, Wo, xc);
                MatCM gw = gym * xc.transpose();
                Tn& gwt = g.grad(w);
                MapRM gwm(gwt.data.data(), Co, K);
                gwm += gw;
            }
            if (g.nodes[x].needs_grad) {
                CMapRM wm(wv.data.data(), Co, K);
                MatCM gxc = wm.transpose() * gym;
                col2im_add(gxc, kh, kw, stride, pad, Ho, Wo, g.grad(x));
            }
        };
        return id;
    }

    int linear(int x, int w, int b) {
        const Tn& xv = nodes[x].val;
        const Tn& wv = nodes[w].val;
        const int B = xv.dim(0), In = xv.dim(1), Out = wv.dim(0);
        check(wv.dim(1) == In, Err::ShapeMismatch, "linear shape mismatch");
        Tn out({B, Out});
        CMapRM xm(xv.data.data(), B, In);
        CMapRM wm(wv.data.data(), Out, In);
        MapRM om(out.data.data(), B, Out);
        om = xm * wm.transpose();
        const Tn& bv = nodes[b].val;
        for (int i = 0; i < B; ++i)
            for (int j = 0; j < Out; ++j) out.at(i, j) += bv[j];

        int id = add_node(std::move(out), {x, w, b});
        nodes[id].back = [x, w, b, id](Graph& g) {
            const Tn& xv = g.nodes[x].val;
            const Tn& wv = g.nodes[w].val;
            const Tn& gy = g.nodes[id].grad;
            const int B = xv.dim(0), In = xv.dim(1), Out = wv.dim(0);
            CMapRM gym(gy.data.data(), B, Out);
            if (g.nodes[b].needs_grad) {
                Tn& gb = g.grad(b);
                for (int j = 0; j < Out; ++j) gb[j] += gym.col(j).sum();
            }
            if (g.nodes[w].needs_grad) {
                CMapRM xm(xv.data.data(), B, In);
                MapRM gwm(g.grad(w).data.data(), Out, In);
                gwm += gym.transpose() * xm;
            }
            if (g.nodes[x].needs_grad) {
                CMapRM wm(wv.data.data(), Out, In);
                MapRM gxm(g.grad(x).data.data(), B, In);
                gxm += gym * wm;
            }
        };
        return id;
    }

    // Normalizes over channel groups of x {B,C,H,W}; per-channel affine.
    int group_norm(int x, int gamma, int beta, int groups, T eps) {
        const Tn& xv = nodes[x].val;
        const int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        check(C % groups == 0, Err::ShapeMismatch, "channels not divisible by groups");
        const int Cg = C / groups;
        const long M = static_cast<long>(Cg) * H * W; // elements per group

        auto stats = std::make_shared<std::vector<T>>(2 * B * groups);
        Tn out(xv.shape);
        const Tn& gv = nodes[gamma].val;
        const Tn& bv = nodes[beta].val;
        for (int bb = 0; bb < B; ++bb) {
            for (int gi = 0; gi < groups; ++gi) {
                const T* src = &xv.at(bb, gi * Cg, 0, 0);
                double sum = 0, sq = 0;
                for (long j = 0; j < M; ++j) {
                    sum += src[j];
                    sq += static_cast<double>(src[j]) * src[j];
                }
                double mean = sum / M;
                double var = sq / M - mean * mean;
                T istd = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
                (*stats)[2 * (bb * groups + gi)] = static_cast<T>(mean);
                (*stats)[2 * (bb * groups + gi) + 1] = istd;
                T* dst = &out.at(bb, gi * Cg, 0, 0);
                for (int cj = 0; cj < Cg; ++cj) {
                    int c = gi * Cg + cj;
                    T ga = gv[c], be = bv[c];
                    const T* s = src + static_cast<long>(cj) * H * W;
                    T* d = dst + static_cast<long>(cj) * H * W;
                    for (long j = 0; j < static_cast<long>(H) * W; ++j)
                        d[j] = ga * (s[j] - static_cast<T>(mean)) * istd + be;
                }
            }
        }

        int id = add_node(std::move(out), {x, gamma, beta});
        nodes[id].back = [x, gamma, beta, groups, id, stats](Graph& g) {
            const Tn& xv = g.nodes[x].val;
            const Tn& gy = g.nodes[id].grad;
            const Tn& gv = g.nodes[gamma].val;
            const int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
            const int Cg = C / groups;
            const long HW = static_cast<long>(H) * W;
            const long M = Cg * HW;

            for (int bb = 0; bb < B; ++bb) {
                for (int gi = 0; gi < groups; ++gi) {
                    T mean = (*stats)[2 * (bb * groups + gi)];
                    T istd = (*stats)[2 * (bb * groups + gi) + 1];
                    const T* xs = &xv.at(bb, gi * Cg, 0, 0);
                    const T* gys = &gy.at(bb, gi * Cg, 0, 0);

                    if (g.nodes[gamma].needs_grad || g.nodes[beta].needs_grad) {
                        Tn& gg = g.grad(gamma);
                        Tn& gb = g.grad(beta);
                        for (int cj = 0; cj < Cg; ++cj) {
                            int c = gi * Cg + cj;
                            double sg = 0, sb = 0;
                            const T* xc = xs + cj * HW;
                            const T* gc = gys + cj * HW;
                            for (long j = 0; j < HW; ++j) {
                                sg += static_cast<double>(gc[j]) * (xc[j] - mean) * istd;
                                sb += gc[j];
                            }
                            gg[c] += static_cast<T>(sg);
                            gb[c] += static_cast<T>(sb);
                        }
                    }
                    if (!g.nodes[x].needs_grad) continue;

                    // dxhat = gy * gamma_c; dx = istd*(dxhat - mean(dxhat)
                    //        - xhat * mean(dxhat*xhat))
                    double s1 = 0, s2 = 0;
                    for (int cj = 0; cj < Cg; ++cj) {
                        int c = gi * Cg + cj;
                        T ga = gv[c];
                        const T* xc = xs + cj * HW;
                        const T* gc = gys + cj * HW;
                        for (long j = 0; j < HW; ++j) {
                            T dxh = gc[j] * ga;
                            T xh = (xc[j] - mean) * istd;
                            s1 += dxh;
                            s2 += static_cast<double>(dxh) * xh;
                        }
                    }
                    T m1 = static_cast<T>(s1 / M), m2 = static_cast<T>(s2 / M);
                    Tn& gx = g.grad(x);
                    T* gxs = &gx.at(bb, gi * Cg, 0, 0);
                    for (int cj = 0; cj < Cg; ++cj) {
                        int c = gi * Cg + cj;
                        T ga = gv[c];
                        const T* xc = xs + cj * HW;
                        const T* gc = gys + cj * HW;
                        T* gd = gxs + cj * HW;
                        for (long j = 0; j < HW; ++j) {
                            T dxh = gc[j] * ga;
                            T xh = (xc[j] - mean) * istd;
                            gd[j] += istd * (dxh - m1 - xh * m2);
                        }
                    }
                }
            }
        };
        return id;
    }

    int silu(int x) {
        const Tn& xv = nodes[x].val;
        Tn out(xv.shape);
        for (int64_t i = 0; i < xv.numel(); ++i) {
            T s = sigmoid(xv[i]);
            out[i] = xv[i] * s;
        }
        int id = add_node(std::move(out), {x});
        nodes[id].back = [x, id](Graph& g) {
            if (!g.nodes[x].needs_grad) return;
            const Tn& xv = g.nodes[x].val;
            const Tn& gy = g.nodes[id].grad;
            Tn& gx = g.grad(x);
            for (int64_t i = 0; i < xv.numel(); ++i) {
                T s = sigmoid(xv[i]);
                gx[i] += gy[i] * s * (T(1) + xv[i] * (T(1) - s));
            }
        };
        return id;
    }

    int add(int a, int b) {
        const Tn& av = nodes[a].val;
        const Tn& bv = nodes[b].val;
        check(av.shape == bv.shape, Err::ShapeMismatch, "add shape mismatch");
        Tn out(av.shape);
        for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] + bv[i];
        int id = add_node(std::move(out), {a, b});
        nodes[id].back = [a, b, id](Graph& g) {
            const Tn& gy = g.nodes[id].grad;
            for (int p : {a, b}) {
                if (!g.nodes[p].needs_grad) continue;
                Tn& gp = g.grad(p);
                for (int64_t i = 0; i < gy.numel(); ++i) gp[i] += gy[i];
            }
        };
        return id;
    }

    // x {B,C,H,W} + e {B,C} broadcast over the spatial dims.
    int add_rows(int x, int e) {
        const Tn& xv = nodes[x].val;
        const Tn& ev = nodes[e].val;
        const int B = xv.dim(0), C = xv.dim(1);
        const long HW = static_cast<long>(xv.dim(2)) * xv.dim(3);
        check(ev.dim(0) == B && ev.dim(1) == C, Err::ShapeMismatch, "add_rows mismatch");
        Tn out(xv.shape);
        for (int bb = 0; bb < B; ++bb)
            for (int c = 0; c < C; ++c) {
                const T* s = &xv.at(bb, c, 0, 0);
                T* d = &out.at(bb, c, 0, 0);
                T ee = ev.at(bb, c);
                for (long j = 0; j < HW; ++j) d[j] = s[j] + ee;
            }
        int id = add_node(std::move(out), {x, e});
        nodes[id].back = [x, e, id](Graph& g) {
            const Tn& gy = g.nodes[id].grad;
            const int B = gy.dim(0), C = gy.dim(1);
            const long HW = static_cast<long>(gy.dim(2)) * gy.dim(3);
            if (g.nodes[x].needs_grad) {
                Tn& gx = g.grad(x);
                for (int64_t i = 0; i < gy.numel(); ++i) gx[i] += gy[i];
            }
            if (g.nodes[e].needs_grad) {
                Tn& ge = g.grad(e);
                for (int bb = 0; bb < B; ++bb)
                    for (int c = 0; c < C; ++c) {
                        const T* s = &gy.at(bb, c, 0, 0);
                        double sum = 0;
                        for (long j = 0; j < HW; ++j) sum += s[j];
                        ge.at(bb, c) += static_cast<T>(sum);
                    }
            }
        };
        return id;
    }

    int concat_ch(int a, int b) {
        const Tn& av = nodes[a].val;
        const Tn& bv = nodes[b].val;
        const int B = av.dim(0), Ca = av.dim(1), Cb = bv.dim(1);
        const int H = av.dim(2), W = av.dim(3);
        check(bv.dim(0) == B && bv.dim(2) == H && bv.dim(3) == W, Err::ShapeMismatch,
              "concat_ch mismatch");
        Tn out({B, Ca + Cb, H, W});
        const long HW = static_cast<long>(H) * W;
        for (int bb = 0; bb < B; ++bb) {
            std::copy_n(&av.at(bb, 0, 0, 0), Ca * HW, &out.at(bb, 0, 0, 0));
            std::copy_n(&bv.at(bb, 0, 0, 0), Cb * HW, &out.at(bb, Ca, 0, 0));
        }
        int id = add_node(std::move(out), {a, b});
        nodes[id].back = [a, b, Ca, Cb, id](Graph& g) {
            const Tn& gy = g.nodes[id].grad;
            const int B = gy.dim(0);
            const long HW = static_cast<long>(gy.dim(2)) * gy.dim(3);
            if (g.nodes[a].needs_grad) {
                Tn& ga = g.grad(a);
                for (int bb = 0; bb < B; ++bb) {
                    const T* s = &gy.at(bb, 0, 0, 0);
                    T* d = &ga.at(bb, 0, 0, 0);
                    for (long j = 0; j < Ca * HW; ++j) d[j] += s[j];
                }
            }
            if (g.nodes[b].needs_grad) {
                Tn& gb = g.grad(b);
                for (int bb = 0; bb < B; ++bb) {
                    const T* s = &gy.at(bb, Ca, 0, 0);
                    T* d = &gb.at(bb, 0, 0, 0);
                    for (long j = 0; j < Cb * HW; ++j) d[j] += s[j];
                }
            }
        };
        return id;
    }

    int upsample2x(int x) {
        const Tn& xv = nodes[x].val;
        const int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
        Tn out({B, C, 2 * H, 2 * W});
        for (int bb = 0; bb < B; ++bb)
            for (int c = 0; c < C; ++c)
                for (int y = 0; y < H; ++y)
                    for (int xx = 0; xx < W; ++xx) {
                        T v = xv.at(bb, c, y, xx);
                        out.at(bb, c, 2 * y, 2 * xx) = v;
                        out.at(bb, c, 2 * y, 2 * xx + 1) = v;
                        out.at(bb, c, 2 * y + 1, 2 * xx) = v;
                        out.at(bb, c, 2 * y + 1, 2 * xx + 1) = v;
                    }
        int id = add_node(std::move(out), {x});
        nodes[id].back = [x, id](Graph& g) {
            if (!g.nodes[x].needs_grad) return;
            const Tn& gy = g.nodes[id].grad;
            Tn& gx = g.grad(x);
            const int B = gx.dim(0), C = gx.dim(1), H = gx.dim(2), W = gx.dim(3);
            for (int bb = 0; bb < B; ++bb)
                for (int c = 0; c < C; ++c)
                    for (int y = 0; y < H; ++y)
                        for (int xx = 0; xx < W; ++xx)
                            gx.at(bb, c, y, xx) += gy.at(bb, c, 2 * y, 2 * xx) +
                                                   gy.at(bb, c, 2 * y, 2 * xx + 1) +
                                                   gy.at(bb, c, 2 * y + 1, 2 * xx) +
                                                   gy.at(bb, c, 2 * y + 1, 2 * xx + 1);
        };
        return id;
    }

    int gather_rows(int table, std::vector<int> idx) {
        const Tn& tv = nodes[table].val;
        const int D = tv.dim(1);
        const int B = static_cast<int>(idx.size());
        Tn out({B, D});
        for (int i = 0; i < B; ++i) {
            check(idx[i] >= 0 && idx[i] < tv.dim(0), Err::BadIndex, "gather_rows index");
            std::copy_n(&tv.at(idx[i], 0), D, &out.at(i, 0));
        }
        auto idx_keep = std::make_shared<std::vector<int>>(std::move(idx));
        int id = add_node(std::move(out), {table});
        nodes[id].back = [table, id, idx_keep](Graph& g) {
            if (!g.nodes[table].needs_grad) return;
            const Tn& gy = g.nodes[id].grad;
            Tn& gt = g.grad(table);
            const int D = gt.dim(1);
            for (size_t i = 0; i < idx_keep->size(); ++i)
                for (int j = 0; j < D; ++j) gt.at((*idx_keep)[i], j) += gy.at(static_cast<int>(i), j);
        };
        return id;
    }

    // Mean of squared residual against a constant target.
    int mse(int pred, Tn target) {
        const Tn& pv = nodes[pred].val;
        check(pv.shape == target.shape, Err::ShapeMismatch, "mse target mismatch");
        double sum = 0;
        for (int64_t i = 0; i < pv.numel(); ++i) {
            double r = static_cast<double>(pv[i]) - target[i];
            sum += r * r;
        }
        Tn out({1});
        out[0] = static_cast<T>(sum / pv.numel());
        auto tgt = std::make_shared<Tn>(std::move(target));
        int id = add_node(std::move(out), {pred});
        nodes[id].back = [pred, id, tgt](Graph& g) {
            if (!g.nodes[pred].needs_grad) return;
            const Tn& pv = g.nodes[pred].val;
            T gy = g.nodes[id].grad[0];
            Tn& gp = g.grad(pred);
            T scale = gy * T(2) / static_cast<T>(pv.numel());
            for (int64_t i = 0; i < pv.numel(); ++i)
                gp[i] += scale * (pv[i] - (*tgt)[i]);
        };
        return id;
    }

private:
    static T sigmoid(T v) { return T(1) / (T(1) + std::exp(-v)); }

    int add_node(Tn val, std::initializer_list<int> parents) {
        bool ng = false;
        for (int p : parents) ng = ng || nodes[p].needs_grad;
        nodes.push_back(Node{std::move(val), {}, ng, nullptr});
        return static_cast<int>(nodes.size()) - 1;
    }

    static void im2col(const Tn& x, int kh, int kw, int stride, int pad, int Ho, int Wo,
                       MatCM& xc) {
        const int B = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
        for (int bb = 0; bb < B; ++bb) {
            const long base = static_cast<long>(bb) * Ho * Wo;
            for (int oy = 0; oy < Ho; ++oy) {
                for (int ox = 0; ox < Wo; ++ox) {
                    const long col = base + static_cast<long>(oy) * Wo + ox;
                    T* dst = xc.data() + col * xc.rows();
                    int r = 0;
                    for (int ci = 0; ci < Ci; ++ci) {
                        for (int ky = 0; ky < kh; ++ky) {
                            int iy = oy * stride - pad + ky;
                            if (iy < 0 || iy >= H) {
                                for (int kx = 0; kx < kw; ++kx) dst[r++] = T(0);
                                continue;
                            }
                            const T* row = &x.at(bb, ci, iy, 0);
                            for (int kx = 0; kx < kw; ++kx) {
                                int ix = ox * stride - pad + kx;
                                dst[r++] = (ix < 0 || ix >= W) ? T(0) : row[ix];
                            }
                        }
                    }
                }
            }
        }
    }

    static void col2im_add(const MatCM& gxc, int kh, int kw, int stride, int pad, int Ho,
                           int Wo, Tn& gx) {
        const int B = gx.dim(0), Ci = gx.dim(1), H = gx.dim(2), W = gx.dim(3);
        for (int bb = 0; bb < B; ++bb) {
            const long base = static_cast<long>(bb) * Ho * Wo;
            for (int oy = 0; oy < Ho; ++oy) {
                for (int ox = 0; ox < Wo; ++ox) {
                    const long col = base + static_cast<long>(oy) * Wo + ox;
                    const T* src = gxc.data() + col * gxc.rows();
                    int r = 0;
                    for (int ci = 0; ci < Ci; ++ci) {
                        for (int ky = 0; ky < kh; ++ky) {
                            int iy = oy * stride - pad + ky;
                            if (iy < 0 || iy >= H) {
                                r += kw;
                                continue;
                            }
                            T* row = &gx.at(bb, ci, iy, 0);
                            for (int kx = 0; kx < kw; ++kx) {
                                int ix = ox * stride - pad + kx;
                                if (ix >= 0 && ix < W) row[ix] += src[r];
                                ++r;
                            }
                        }
                    }
                }
            }
        }
    }
};

} // namespace uvtex::ad
