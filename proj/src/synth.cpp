#include "pcdc/synth.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace pcdc {

namespace {

const char* const kEnglishWords[] = {
    "the", "of", "and", "a", "to", "in", "is", "was", "he", "for", "it", "with", "as", "his",
    "on", "be", "at", "by", "had", "not", "are", "but", "from", "or", "have", "an", "they",
    "which", "one", "you", "were", "her", "all", "she", "there", "would", "their", "we", "him",
    "been", "has", "when", "who", "will", "more", "no", "if", "out", "so", "said", "what", "up",
    "its", "about", "into", "than", "them", "can", "only", "other", "new", "some", "could",
    "time", "these", "two", "may", "then", "do", "first", "any", "my", "now", "such", "like",
    "our", "over", "man", "me", "even", "most", "made", "after", "also", "did", "many", "before",
    "must", "through", "back", "years", "where", "much", "your", "way", "well", "down", "should",
    "because", "each", "just", "those", "people", "how", "too", "little", "state", "good", "very",
    "make", "world", "still", "own", "see", "men", "work", "long", "get", "here", "between",
    "both", "life", "being", "under", "never", "day", "same", "another", "know", "while", "last",
    "might", "us", "great", "old", "year", "off", "come", "since", "against", "go", "came",
    "right", "used", "take", "three", "system", "number", "small", "part", "place", "case",
    "given", "point", "order", "group", "early", "water", "form", "least", "power", "thing",
    "general", "found", "light", "less", "during", "result", "change", "large", "value", "often",
    "model", "data", "set", "term", "process", "rate", "function", "theory", "field", "method",
    "space", "line", "within", "example", "level", "high", "second", "single", "certain",
    "common", "problem", "course", "side", "local", "whole", "fact", "rather", "present",
    "effect", "section", "surface", "area", "table", "structure", "measure", "energy", "study",
    "nature", "known", "free", "end", "true", "type", "body", "total", "history", "language",
    "question", "among", "however", "without", "different", "several", "possible", "important",
    "following", "therefore", "analysis", "approach", "research", "information", "development",
    "university", "century", "original", "particular", "experiment", "material", "probability",
    "distribution", "equation", "figure", "almost", "every", "along", "across", "later",
    "though", "once", "again", "always", "around", "began", "called", "consider", "described",
    "due", "either", "far", "further", "hand", "held", "house", "idea", "including", "itself",
    "kind", "land", "law", "left", "country", "near", "next", "night", "nothing", "observed",
    "page", "paper", "perhaps", "public", "quite", "rest", "returned", "school", "shown",
    "simple", "social", "special", "standard", "taken", "test", "third", "thought", "times",
    "together", "turned", "upon", "usually", "various", "war", "appears", "became", "center",
};
constexpr size_t kEnglishWordCount = sizeof(kEnglishWords) / sizeof(kEnglishWords[0]);

const char* const kIdentifiers[] = {
    "buffer", "state", "count", "index", "offset", "length", "result", "value", "input",
    "output", "stream", "table", "entry", "node", "item", "data", "size", "total", "flags",
    "config", "handle", "cursor", "block", "chunk", "queue", "stack", "cache", "slot", "key",
    "head", "tail", "next", "prev", "left", "right", "parent", "child", "depth", "width",
    "limit", "bound", "start", "stop", "tmp", "pos", "ptr", "len", "idx", "ctx",
};
constexpr size_t kIdentifierCount = sizeof(kIdentifiers) / sizeof(kIdentifiers[0]);

const char* const kCyrillicWords[] = {
    "система", "данные", "модель", "время", "работа", "число", "слово", "пример", "частота",
    "уровень", "процесс", "результат", "значение", "функция", "таблица", "память", "поток",
};
const char* const kGreekWords[] = {
    "σύστημα", "δεδομένα", "μοντέλο", "χρόνος", "αριθμός", "λέξη", "παράδειγμα", "τιμή",
    "διαδικασία", "αποτέλεσμα", "συνάρτηση", "πίνακας", "μνήμη", "ροή", "επίπεδο",
};
const char* const kCjkWords[] = {
    "数据", "系统", "模型", "时间", "工作", "数字", "词语", "例子", "频率", "水平", "过程",
    "结果", "数值", "函数", "表格", "内存", "流量",
};

// Zipf-ranked sampler over a fixed list. Cumulative weights are built once
// per call site; sampling is a binary search over a uniform draw.
class ZipfSampler {
public:
    ZipfSampler(size_t n, double exponent) : cum_(n) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            acc += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
            cum_[i] = acc;
        }
        for (double& v : cum_) v /= acc;
    }

    size_t draw(SplitMix64& rng) const {
        double u = rng.unit();
        size_t lo = 0, hi = cum_.size() - 1;
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (cum_[mid] < u) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return lo;
    }

private:
    std::vector<double> cum_;
};

void append(Bytes& out, const std::string& s) { out.insert(out.end(), s.begin(), s.end()); }

}  // namespace

Bytes synth_english_text(uint64_t seed, size_t target_bytes) {
    SplitMix64 rng(seed);
    ZipfSampler zipf(kEnglishWordCount, 1.05);
    Bytes out;
    out.reserve(target_bytes + 256);

    size_t sentences_left = 3 + rng.below(5);
    while (out.size() < target_bytes) {
        size_t words = 5 + rng.below(14);
        for (size_t w = 0; w < words; ++w) {
            std::string word = kEnglishWords[zipf.draw(rng)];
            if (w == 0) word[0] = static_cast<char>(word[0] - 'a' + 'A');
            // Occasional inflection keeps the vocabulary from being flat.
            uint64_t form = rng.below(20);
            if (form == 0) word += "s";
            else if (form == 1) word += "ing";
            else if (form == 2) word += "ed";
            if (rng.below(40) == 0) word = std::to_string(rng.below(2000));
            append(out, word);
            if (w + 1 < words) {
                if (rng.below(12) == 0) out.push_back(',');
                out.push_back(' ');
            }
        }
        out.push_back(rng.below(14) == 0 ? '?' : '.');
        if (--sentences_left == 0) {
            append(out, "\n\n");
            sentences_left = 3 + rng.below(5);
        } else {
            out.push_back(' ');
        }
    }
    out.resize(target_bytes);
    return out;
}

Bytes synth_code_text(uint64_t seed, size_t target_bytes) {
    SplitMix64 rng(seed);
    ZipfSampler zipf(kIdentifierCount, 0.9);
    Bytes out;
    out.reserve(target_bytes + 256);
    auto ident = [&]() { return std::string(kIdentifiers[zipf.draw(rng)]); };

    while (out.size() < target_bytes) {
        std::string fn = ident() + "_" + ident();
        append(out, "static int " + fn + "(int " + ident() + ", int " + ident() + ") {\n");
        size_t lines = 3 + rng.below(8);
        for (size_t i = 0; i < lines; ++i) {
            switch (rng.below(5)) {
                case 0:
                    append(out, "    int " + ident() + " = " + std::to_string(rng.below(256)) + ";\n");
                    break;
                case 1:
                    append(out, "    " + ident() + " += " + ident() + " * " +
                                    std::to_string(1 + rng.below(16)) + ";\n");
                    break;
                case 2:
                    append(out, "    if (" + ident() + " > " + ident() + ") {\n        " + ident() +
                                    " = " + ident() + ";\n    }\n");
                    break;
                case 3:
                    append(out, "    for (int i = 0; i < " + ident() + "; ++i) {\n        " +
                                    ident() + "[i] = " + ident() + "[i] + i;\n    }\n");
                    break;
                default:
                    append(out, "    " + ident() + " = (" + ident() + " << 1) ^ " + ident() + ";\n");
                    break;
            }
        }
        append(out, "    return " + ident() + ";\n}\n\n");
    }
    out.resize(target_bytes);
    return out;
}

Bytes synth_pdf_bytes(uint64_t seed, size_t target_bytes) {
    SplitMix64 rng(seed);
    Bytes out;
    out.reserve(target_bytes + 1024);
    append(out, "%PDF-1.4\n%\xe2\xe3\xcf\xd3\n");

    int obj = 1;
    while (out.size() < target_bytes) {
        char head[128];
        std::snprintf(head, sizeof(head), "%d 0 obj\n<< /Type /XObject /Subtype /Image /Length %d >>\nstream\n",
                      obj, static_cast<int>(600 + rng.below(2200)));
        append(out, head);
        // Binary stream body: high-entropy bytes dominate the file, like a
        // compressed image or font program would.
        size_t body = 600 + rng.below(2200);
        for (size_t i = 0; i < body && out.size() < target_bytes; ++i) {
            out.push_back(static_cast<uint8_t>(rng.next()));
        }
        append(out, "\nendstream\nendobj\n");
        if (rng.below(4) == 0) {
            char dict[160];
            std::snprintf(dict, sizeof(dict),
                          "%d 0 obj\n<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] "
                          "/Contents %d 0 R >>\nendobj\n",
                          obj + 1, obj);
            append(out, dict);
            ++obj;
        }
        ++obj;
    }
    append(out, "xref\n0 1\n0000000000 65535 f \ntrailer\n<< /Size 1 >>\nstartxref\n0\n%%EOF\n");
    out.resize(target_bytes);
    return out;
}

Bytes synth_multilingual_text(uint64_t seed, size_t target_bytes) {
    SplitMix64 rng(seed);
    Bytes out;
    out.reserve(target_bytes + 256);
    const char* const* lists[3] = {kCyrillicWords, kGreekWords, kCjkWords};
    const size_t sizes[3] = {sizeof(kCyrillicWords) / sizeof(char*),
                             sizeof(kGreekWords) / sizeof(char*),
                             sizeof(kCjkWords) / sizeof(char*)};

    while (out.size() < target_bytes) {
        size_t lang = rng.below(3);
        size_t words = 4 + rng.below(10);
        for (size_t w = 0; w < words; ++w) {
            append(out, lists[lang][rng.below(sizes[lang])]);
            if (w + 1 < words) out.push_back(' ');
        }
        append(out, lang == 2 ? "。\n" : ".\n");
    }
    out.resize(target_bytes);
    return out;
}

}  // namespace pcdc
