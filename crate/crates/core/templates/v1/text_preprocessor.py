_TEXT_COLS = {COLUMNS}
for _col in _TEXT_COLS:
    for __frame in (__train_dataset, __test_dataset):
        __frame[_col] = (__frame[_col].fillna("").astype(str).str.lower()
                         .str.replace(r"[^a-z0-9]+", " ", regex=True).str.strip())
