_DATE_COLS = {COLUMNS}
for _col in _DATE_COLS:
    for __frame in (__train_dataset, __test_dataset):
        __dates = pd.to_datetime(__frame[_col], errors="coerce")
        __frame[_col + "_year"] = __dates.dt.year.fillna(0)
        __frame[_col + "_month"] = __dates.dt.month.fillna(0)
        __frame[_col + "_day"] = __dates.dt.day.fillna(0)
        __frame[_col + "_dayofweek"] = __dates.dt.dayofweek.fillna(0)
    __train_dataset = __train_dataset.drop([_col], axis=1)
    __test_dataset = __test_dataset.drop([_col], axis=1)
