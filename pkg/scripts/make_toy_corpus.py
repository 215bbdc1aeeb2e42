"""Write the bundled synthetic corpus (train + held-out) in CoNLL format.

Each sentence is written as space-separated ``word/POS/NE`` items.
"""

from pathlib import Path

TRAIN = """\
Joko/NNP/B-PER Widodo/NNP/I-PER mengunjungi/VBT/O Bandung/NNP/B-LOC kemarin/ADK/O ./SYM/O
saya/PRN/O makan/VBT/O bakso/NNO/B-FNB di/PPO/O Surabaya/NNP/B-LOC ./SYM/O
Siti/NNP/B-PER membeli/VBT/O Samsung/NNP/B-IND baru/ADJ/O dengan/PPO/O harga/NNO/O rp/$$$/O 2/NUM/O juta/NUM/O ./SYM/O
Java/NNP/B-EVT Jazz/NNP/I-EVT Festival/NNP/I-EVT akan/ADV/O diadakan/VBP/O di/PPO/O Jakarta/NNP/B-LOC ./SYM/O
wah/INT/O nasi/NNO/B-FNB goreng/NNO/I-FNB ini/ART/O enak/ADJ/O sekali/ADV/O !/SYM/O
mereka/PRN/O tidak/NEG/O pergi/VBI/O ke/PPO/O Bali/NNP/B-LOC karena/CSN/O hujan/NNO/O ./SYM/O
Budi/NNP/B-PER adalah/VBL/O pendiri/NNO/O Gojek/NNP/B-IND ./SYM/O
ada/VBE/O beberapa/KUA/O pilihan/NNO/O menu/NNO/O seperti/PPO/O sate/NNO/B-FNB ayam/NNO/I-FNB dan/CCN/O es/NNO/B-FNB teh/NNO/I-FNB ./SYM/O
siapa/PRI/O yang/PRR/O menonton/VBT/O Asian/NNP/B-EVT Games/NNP/I-EVT ?/SYM/O
jarak/NNO/O Bandung/NNP/B-LOC ke/PPO/O Jakarta/NNP/B-LOC sekitar/ADV/O 150/NUM/O km/UNS/O ./SYM/O
Dodee/NNP/B-PER Paidang/NNP/I-PER memberikan/VBT/O promo/NNO/B-EVT happy/NNO/I-EVT hour/NNO/I-EVT ./SYM/O
ayo/INT/O coba/VBT/O Indomie/NNP/B-IND goreng/ADJ/O sekarang/ADK/O juga/ADV/O !/SYM/O
rumahnya/NNO/O dekat/ADJ/O dengan/PPO/O warung/NNO/O rendang/NNO/B-FNB di/PPO/O Padang/NNP/B-LOC ./SYM/O
apa/PRI/O kamu/PRN/O bisa/ADV/O datang/VBI/O ke/PPO/O Pekan/NNP/B-EVT Raya/NNP/I-EVT Jakarta/NNP/I-EVT ?/SYM/O
semua/KUA/O tiket/NNO/O Java/NNP/B-EVT Jazz/NNP/I-EVT Festival/NNP/I-EVT dijual/VBP/O habis/ADJ/O ./SYM/O
sang/ART/O juara/NNO/O Susi/NNP/B-PER Susanti/NNP/I-PER pulang/VBI/O ke/PPO/O Tasikmalaya/NNP/B-LOC ./SYM/O
beli/VBT/O 2/NUM/O kg/UNS/O rendang/NNO/B-FNB atau/CCN/O sate/NNO/B-FNB ayam/NNO/I-FNB pun/PAR/O boleh/ADV/O ./SYM/O
jika/CSN/O besok/ADK/O hujan/NNO/O ,/SYM/O kami/PRN/O tidak/NEG/O akan/ADV/O ke/PPO/O Bali/NNP/B-LOC ./SYM/O
akun/NNO/O @henjiwong/NNP/B-PER mencatatkan/VBT/O 2.400/NUM/O post/NNO/O Instagram/NNP/B-IND ./SYM/O
ketika/CSN/O Budi/NNP/B-PER tidur/VBI/O ,/SYM/O Siti/NNP/B-PER makan/VBT/O bakso/NNO/B-FNB nya/PRK/O lah/PAR/O ./SYM/O
"""

HELDOUT = """\
Susi/NNP/B-PER makan/VBT/O sate/NNO/B-FNB ayam/NNO/I-FNB di/PPO/O Bandung/NNP/B-LOC ./SYM/O
Joko/NNP/B-PER membeli/VBT/O Indomie/NNP/B-IND di/PPO/O Surabaya/NNP/B-LOC ./SYM/O
mereka/PRN/O menonton/VBT/O Asian/NNP/B-EVT Games/NNP/I-EVT di/PPO/O Jakarta/NNP/B-LOC kemarin/ADK/O ./SYM/O
Dodee/NNP/B-PER pergi/VBI/O ke/PPO/O Padang/NNP/B-LOC dengan/PPO/O Gojek/NNP/B-IND ./SYM/O
kami/PRN/O tidak/NEG/O makan/VBT/O nasi/NNO/B-FNB goreng/NNO/I-FNB ./SYM/O
Siti/NNP/B-PER akan/ADV/O datang/VBI/O ke/PPO/O Java/NNP/B-EVT Jazz/NNP/I-EVT Festival/NNP/I-EVT ./SYM/O
Budi/NNP/B-PER membeli/VBT/O es/NNO/B-FNB teh/NNO/I-FNB dan/CCN/O bakso/NNO/B-FNB ./SYM/O
saya/PRN/O pulang/VBI/O ke/PPO/O Tasikmalaya/NNP/B-LOC besok/ADK/O ./SYM/O
"""


def to_conll(block: str) -> str:
    out = []
    for line in block.strip().splitlines():
        for item in line.split():
            word, pos, ne = item.rsplit("/", 2) if item.count("/") > 2 else item.split("/")
            out.append(f"{word}\t{pos}\t{ne}\n")
        out.append("\n")
    return "".join(out[:-1])


if __name__ == "__main__":
    data = Path(__file__).resolve().parents[1] / "src" / "indoner" / "data"
    (data / "toy_train.conll").write_text(to_conll(TRAIN), encoding="utf-8")
    (data / "toy_heldout.conll").write_text(to_conll(HELDOUT), encoding="utf-8")
