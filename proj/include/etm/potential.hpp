#pragma once

#include "location.hpp"
#include "model.hpp"
#include "rational.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

// A locally constant potential of depth k: one exact value per admissible k-word, stored
// by word rank.
class Potential {
public:
    Potential(const Model& M, int k, std::vector<Rational> values) : M_(&M), k_(k), codec_(M), val_(std::move(values)) {
        if (k < 1) throw std::invalid_argument("potential depth must be at least 1");
        if (val_.size() != codec_.total(k))
            throw std::invalid_argument("potential needs " + std::to_string(codec_.total(k)) + " values, got " +
                                        std::to_string(val_.size()));
        prepare();
    }

    static Potential constant(const Model& M, const Rational& c) {
        return Potential(M, 1, std::vector<Rational>(M.T, c));
    }
    static Potential indicator(const Model& M, int tile, const Rational& v) {
        std::vector<Rational> vals(M.T, Rational(0));
        vals.at(tile) = v;
        return Potential(M, 1, vals);
    }
    static Potential from_words(const Model& M, int k, const std::map<Word, Rational>& table) {
        WordCodec codec(M);
        std::vector<Rational> vals(codec.total(k));
        std::vector<char> seen(vals.size(), 0);
        for (const auto& [w, v] : table) {
            if (static_cast<int>(w.size()) != k || !M.admissible_word(w))
                throw std::invalid_argument("inadmissible word " + M.word_string(w) + " in potential table");
            auto r = codec.encode(w);
            vals[r] = v;
            seen[r] = 1;
        }
        for (std::size_t r = 0; r < seen.size(); ++r)
            if (!seen[r])
                throw std::invalid_argument("potential table misses word " +
                                            M.word_string(codec.decode(r, k)));
        return Potential(M, k, vals);
    }
    // c + beta o sigma - beta, of depth beta.depth() + 1
    static Potential coboundary(const Rational& c, const Potential& beta) {
        const Model& M = beta.model();
        const int k = beta.depth() + 1;
        WordCodec codec(M);
        std::vector<Rational> vals(codec.total(k));
        for (std::uint64_t r = 0; r < vals.size(); ++r) {
            Word w = codec.decode(r, k);
            Word tail(w.begin() + 1, w.end()), head(w.begin(), w.end() - 1);
            vals[r] = c + beta.value(tail) - beta.value(head);
        }
        return Potential(M, k, vals);
    }

    // "w0.w1,value" lines; the depth is the word length
    static Potential parse_table(const Model& M, const std::string& text) {
        std::map<Word, Rational> table;
        std::istringstream in(text);
        std::string line;
        int k = -1, ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            auto comma = line.find(',');
            if (comma == std::string::npos) throw std::invalid_argument("line " + std::to_string(ln) + ": expected word,value");
            Word w = M.parse_word(detail::trim(line.substr(0, comma)));
            if (k < 0) k = static_cast<int>(w.size());
            if (static_cast<int>(w.size()) != k)
                throw std::invalid_argument("line " + std::to_string(ln) + ": mixed word lengths");
            if (!table.emplace(w, parse_rational(detail::trim(line.substr(comma + 1)))).second)
                throw std::invalid_argument("line " + std::to_string(ln) + ": repeated word");
        }
        if (k < 1) throw std::invalid_argument("empty potential table");
        return from_words(M, k, table);
    }
    std::string serialize() const {
        std::ostringstream o;
        for (std::uint64_t r = 0; r < val_.size(); ++r)
            o << M_->word_string(codec_.decode(r, k_)) << "," << to_string(val_[r]) << "\n";
        return o.str();
    }

    const Model& model() const { return *M_; }
    const WordCodec& codec() const { return codec_; }
    int depth() const { return k_; }
    std::size_t size() const { return val_.size(); }
    const Rational& at(std::uint64_t r) const { return val_[r]; }
    double dat(std::uint64_t r) const { return dbl_[r]; }
    const Rational& value(const Word& w) const { return val_[codec_.encode(w)]; }
    Word word(std::uint64_t r) const { return codec_.decode(r, k_); }
    const std::vector<Rational>& values() const { return val_; }
    const std::vector<double>& dvalues() const { return dbl_; }
    Rational min_value() const { return *std::min_element(val_.begin(), val_.end()); }
    Rational max_value() const { return *std::max_element(val_.begin(), val_.end()); }

    Potential scaled(const Rational& c) const {
        auto v = val_;
        for (auto& x : v) x *= c;
        return Potential(*M_, k_, v);
    }
    Potential plus_constant(const Rational& c) const {
        auto v = val_;
        for (auto& x : v) x += c;
        return Potential(*M_, k_, v);
    }
    // the same function viewed at a larger depth
    Potential lifted(int k) const {
        if (k < k_) throw std::invalid_argument("cannot lower the depth of a potential");
        std::vector<Rational> v(codec_.total(k));
        for (std::uint64_t r = 0; r < v.size(); ++r) {
            Word w = codec_.decode(r, k);
            w.resize(k_);
            v[r] = value(w);
        }
        return Potential(*M_, k, v);
    }

    // rank of the window of length k starting at w[i], read cyclically in w
    std::uint64_t window_rank(const Word& w, std::size_t i) const {
        if (k_ == 1) return static_cast<std::uint64_t>(w[i % w.size()]);
        Word win(k_);
        for (int j = 0; j < k_; ++j) win[j] = w[(i + j) % w.size()];
        return codec_.encode(win);
    }
    // symbolic S_n of the periodic word w (n = |w|)
    Rational periodic_sum(const Word& w) const {
        if (fast_) {
            long long s = 0;
            for (std::size_t i = 0; i < w.size(); ++i) s += num_[window_rank(w, i)];
            return Rational(BigInt(s), den_);
        }
        Rational s = 0;
        for (std::size_t i = 0; i < w.size(); ++i) s += val_[window_rank(w, i)];
        return s;
    }
    double periodic_sum_double(const Word& w) const {
        double s = 0;
        for (std::size_t i = 0; i < w.size(); ++i) s += dbl_[window_rank(w, i)];
        return s;
    }

private:
    void prepare() {
        dbl_.clear();
        for (const auto& v : val_) dbl_.push_back(to_double(v));
        den_ = 1;
        for (const auto& v : val_) den_ = boost::multiprecision::lcm(den_, BigInt(denominator(v)));
        fast_ = true;
        num_.clear();
        const BigInt limit = BigInt(1) << 40;
        for (const auto& v : val_) {
            BigInt n = numerator(v) * (den_ / denominator(v));
            if (abs(n) >= limit) {
                fast_ = false;
                break;
            }
            num_.push_back(n.convert_to<long long>());
        }
    }

    const Model* M_;
    int k_;
    WordCodec codec_;
    std::vector<Rational> val_;
    std::vector<double> dbl_;
    BigInt den_;
    bool fast_ = false;
    std::vector<long long> num_;
};

// Point values of a potential along the orbit of a coded point.
//
// Off C the value is that of the k-tile containing the point. On C several k-tiles contain
// it, and the value is a weighted average over them: at each step the tiles carrying f^i(x)
// are split evenly within each color, and the weight of each 0-tile at the start of the
// cycle is the stationary vector of the product of those splittings around the cycle. The
// weights are consistent under the shift, so c + b o f - b evaluates to an exact pointwise
// coboundary.
class PointValues {
public:
    PointValues(const Potential& phi, ResolvedPoint x) : phi_(&phi), x_(std::move(x)) {
        const Model& M = phi.model();
        const int n = x_.code.q() + x_.code.p();
        tiles_.resize(n);
        K_.resize(n);
        u_.resize(n);
        for (int i = 0; i < n; ++i) {
            tiles_[i] = tiles_at(M, x_.cell(i));
            std::array<std::array<int, 2>, 2> K{};
            std::array<int, 2> per_color{0, 0};
            for (int X : tiles_[i]) {
                ++K[idx(M.face[X])][idx(M.color[X])];
                ++per_color[idx(M.color[X])];
            }
            K_[i] = K;
            u_[i] = std::max(per_color[0], per_color[1]);
        }
        r_.assign(n + 1, {Rational(0), Rational(0)});
        const int q = x_.code.q();
        // product of the column-stochastic steps around the cycle
        std::array<std::array<Rational, 2>, 2> P{{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}}};
        for (int i = n - 1; i >= q; --i) P = mul(step(i), P);
        std::array<Rational, 2> col{P[0][0] + P[1][0], P[0][1] + P[1][1]};
        std::array<Rational, 2> r;
        if (col[0] == 0 || col[1] == 0) {
            int c = col[0] == 0 ? 1 : 0;
            r = {P[0][c], P[1][c]};
        } else {
            Rational a = P[1][0], b = P[0][1];
            if (a + b > 0)
                r = {b / (a + b), a / (a + b)};
            else
                r = {Rational(1, 2), Rational(1, 2)};
        }
        r_[q] = r_[n] = r;
        for (int i = n - 1; i > q; --i) r_[i] = apply(step(i), r_[i + 1]);
        for (int i = q - 1; i >= 0; --i) r_[i] = apply(step(i), r_[i + 1]);
        cache_.assign(n, {});
        have_.assign(n, 0);
    }

    const ResolvedPoint& point() const { return x_; }

    // phi at f^i(x)
    const Rational& at(long i) {
        int j = x_.code.pos(i);
        if (!have_[j]) {
            Rational s = 0;
            for (const auto& [word, wt] : distribution(j, phi_->depth())) s += wt * phi_->value(word);
            cache_[j] = s;
            have_[j] = 1;
        }
        return cache_[j];
    }
    Rational birkhoff(long n) {
        Rational s = 0;
        for (long i = 0; i < n; ++i) s += at(i);
        return s;
    }
    // the averaging weights of the k-tiles at f^i(x), as (word, weight)
    std::vector<std::pair<Word, Rational>> distribution(long i, int k) {
        std::vector<std::pair<Word, Rational>> out;
        Word w;
        collect(x_.code.pos(i), k, Rational(1), w, out);
        return out;
    }

private:
    using Mat = std::array<std::array<Rational, 2>, 2>;
    Mat step(int i) const {
        Mat S;
        for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) S[c][d] = Rational(K_[i][c][d], u_[i]);
        return S;
    }
    static Mat mul(const Mat& A, const Mat& B) {
        Mat C;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) C[i][j] = A[i][0] * B[0][j] + A[i][1] * B[1][j];
        return C;
    }
    static std::array<Rational, 2> apply(const Mat& A, const std::array<Rational, 2>& v) {
        return {A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1]};
    }
    void collect(long i, int k, const Rational& weight, Word& w, std::vector<std::pair<Word, Rational>>& out) {
        const Model& M = phi_->model();
        if (static_cast<int>(w.size()) == k) {
            Rational wt = weight * r_[x_.code.pos(i)][idx(M.color[w.back()])];
            if (wt != 0) out.emplace_back(w, wt);
            return;
        }
        int j = x_.code.pos(i);
        for (int X : tiles_[j]) {
            if (!w.empty() && !M.admissible(w.back(), X)) continue;
            w.push_back(X);
            collect(i + 1, k, weight / u_[j], w, out);
            w.pop_back();
        }
    }

    const Potential* phi_;
    ResolvedPoint x_;
    std::vector<std::vector<int>> tiles_;
    std::vector<std::array<std::array<int, 2>, 2>> K_;
    std::vector<int> u_;
    std::vector<std::array<Rational, 2>> r_;
    std::vector<Rational> cache_;
    std::vector<char> have_;
};

inline Rational point_value(const Potential& phi, const CodedPoint& x) {
    PointValues pv(phi, ResolvedPoint(phi.model(), x));
    return pv.at(0);
}

inline Rational birkhoff_sum(const Potential& phi, const CodedPoint& x, long n) {
    if (n == 0) return 0;
    PointValues pv(phi, ResolvedPoint(phi.model(), x));
    return pv.birkhoff(n);
}

}  // namespace etm
