"""airgaplab: a software laboratory for air-gap covert-channel key exfiltration.

The pipeline: a 256-bit wallet private key is framed into a CRC-protected,
Hamming-coded bitstream (keyframe), mapped onto a physical-layer carrier
(modem: audio waveforms or LED/fan on-off traces), pushed through a
parameterized channel model (channel), and decoded back.  Two optical
channels are implemented exactly rather than modeled: QR-code padding
steganography and low-contrast image embedding (optstego), plus removable
media hiding in FAT16 slack space (mediahide).  The harness module runs
end-to-end scenarios and reproduces published per-channel time budgets.
"""

__version__ = "0.1.0"
