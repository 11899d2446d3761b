#ifndef EVCAS_HEAP_HPP
#define EVCAS_HEAP_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace evcas {

// addressable d-ary min-heap over ids in [0, n)
template <typename Key, unsigned D = 4>
class IndexedHeap {
public:
    explicit IndexedHeap(std::uint32_t n = 0) : pos_(n, kAbsent) {}

    void resize(std::uint32_t n) { pos_.assign(n, kAbsent); heap_.clear(); }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    bool contains(std::uint32_t id) const { return pos_[id] != kAbsent; }
    const Key& top_key() const { return heap_.front().first; }
    std::uint32_t top() const { return heap_.front().second; }
    const Key& key_of(std::uint32_t id) const { return heap_[pos_[id]].first; }

    void push_or_update(std::uint32_t id, const Key& k) {
        if (!contains(id)) {
            pos_[id] = static_cast<std::uint32_t>(heap_.size());
            heap_.emplace_back(k, id);
            up(pos_[id]);
            return;
        }
        const std::uint32_t i = pos_[id];
        const bool smaller = k < heap_[i].first;
        heap_[i].first = k;
        if (smaller) up(i); else down(i);
    }

    void erase(std::uint32_t id) {
        if (!contains(id)) return;
        const std::uint32_t i = pos_[id];
        swap_at(i, static_cast<std::uint32_t>(heap_.size() - 1));
        heap_.pop_back();
        pos_[id] = kAbsent;
        if (i < heap_.size()) {
            up(i);
            down(i);
        }
    }

    std::uint32_t pop() {
        const std::uint32_t id = top();
        erase(id);
        return id;
    }

private:
    static constexpr std::uint32_t kAbsent = 0xffffffffu;
    std::vector<std::pair<Key, std::uint32_t>> heap_;
    std::vector<std::uint32_t> pos_;

    void swap_at(std::uint32_t a, std::uint32_t b) {
        std::swap(heap_[a], heap_[b]);
        pos_[heap_[a].second] = a;
        pos_[heap_[b].second] = b;
    }
    void up(std::uint32_t i) {
        while (i > 0) {
            const std::uint32_t p = (i - 1) / D;
            if (!(heap_[i].first < heap_[p].first)) break;
            swap_at(i, p);
            i = p;
        }
    }
    void down(std::uint32_t i) {
        for (;;) {
            std::uint32_t best = i;
            const std::size_t first = static_cast<std::size_t>(i) * D + 1;
            for (std::size_t c = first; c < first + D && c < heap_.size(); ++c)
                if (heap_[c].first < heap_[best].first) best = static_cast<std::uint32_t>(c);
            if (best == i) return;
            swap_at(i, best);
            i = best;
        }
    }
};

}  // namespace evcas

#endif
