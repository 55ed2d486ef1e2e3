"""Independent straight-line oracle for the per-device digest recurrence.

Kept deliberately separate from the package implementation: every 64-bit
operation is spelled out inline here, and the golden vector file is generated
from THIS module (run it as a script), never from the package. Tests then
hold the package to the frozen file.
"""

M64 = (1 << 64) - 1

GOLDEN_PATH = "data/golden_digests.txt"


def splitmix_finalize(value):
    v = value & M64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & M64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & M64
    v = v ^ (v >> 31)
    return v


def oracle_digest(seed, step, device, corrupted):
    # Lane inputs first, then an explicit rotate-xor fold pass.
    lane_hashes = []
    for lane in range(16):
        mixed_in = (seed & M64)
        mixed_in ^= (step * 0x9E3779B97F4A7C15) & M64
        mixed_in ^= (device * 0xC2B2AE3D27D4EB4F) & M64
        mixed_in ^= lane
        lane_hashes.append(splitmix_finalize(mixed_in))
    acc = 0
    for h in lane_hashes:
        rotated = ((acc << 7) & M64) | (acc >> 57)
        acc = rotated ^ h
    if corrupted:
        acc = acc ^ splitmix_finalize(acc ^ 0x165667B19E3779F9)
    return acc


CASES = [
    (0, 0, 0),
    (0, 0, 1),
    (0, 1, 0),
    (1, 0, 0),
    (0, 0, 26879),
    (42, 1000, 8959),
    (0xDEADBEEF, 123456, 280),
    (0xFFFFFFFFFFFFFFFF, 0xFFFFFFFFFFFFFFFF, 0xFFFFFFFFFFFFFFFF),
    (0x9E3779B97F4A7C15, 7, 7),
    (20250801, 259199, 12345),
    (1, 1, 1),
    (0x123456789ABCDEF0, 2**32, 2**31),
]


def golden_lines():
    lines = []
    for seed, step, device in CASES:
        for flag in (0, 1):
            digest = oracle_digest(seed, step, device, bool(flag))
            lines.append(f"{seed} {step} {device} {flag} {digest:016x}")
    return lines


if __name__ == "__main__":
    import pathlib

    out = pathlib.Path(__file__).parent / GOLDEN_PATH
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(golden_lines()) + "\n")
    print(f"wrote {len(CASES) * 2} golden digests to {out}")
