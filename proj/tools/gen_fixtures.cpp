// Regenerates the bundled corpora under data/. The outputs are committed;
// rerun only when the synthesizers change.

#include <cstdio>
#include <string>

#include "pcdc/pipeline.hpp"
#include "pcdc/synth.hpp"

int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : "data";
    struct Job {
        const char* name;
        pcdc::Bytes bytes;
    };
    const Job jobs[] = {
        {"text_en.txt", pcdc::synth_english_text(0x7e570001, 1u << 20)},
        {"code_sample.txt", pcdc::synth_code_text(0x7e570002, 256u << 10)},
        {"sample.pdf", pcdc::synth_pdf_bytes(0x7e570003, 256u << 10)},
        {"text_multi.txt", pcdc::synth_multilingual_text(0x7e570004, 128u << 10)},
    };
    for (const auto& job : jobs) {
        std::string path = dir + "/" + job.name;
        pcdc::write_file_atomic(path, job.bytes);
        std::printf("%s: %zu bytes\n", path.c_str(), job.bytes.size());
    }
    return 0;
}
