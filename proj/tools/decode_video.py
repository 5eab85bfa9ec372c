#!/usr/bin/env python3
"""Frame extractor for `motrace ingest --video`.

Usage: decode_video.py INPUT OUTDIR PATTERN

Writes every frame of INPUT as OUTDIR/(PATTERN % k) for k = 1, 2, ...
Set VIDEO_DECODER to this script's path to use it.
"""

import os
import sys


def main(argv):
    if len(argv) != 4:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    try:
        import cv2
    except ImportError:
        print("decode_video.py needs opencv-python", file=sys.stderr)
        return 127
    src, out_dir, pattern = argv[1:]
    cap = cv2.VideoCapture(src)
    if not cap.isOpened():
        print(f"cannot open {src}", file=sys.stderr)
        return 1
    os.makedirs(out_dir, exist_ok=True)
    count = 0
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        count += 1
        if not cv2.imwrite(os.path.join(out_dir, pattern % count), frame):
            print(f"cannot write frame {count}", file=sys.stderr)
            return 1
    if count == 0:
        print(f"no frames decoded from {src}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
