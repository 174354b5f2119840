from sklearn.feature_extraction.text import TfidfVectorizer

_TEXT_COLS = {COLUMNS}
for _col in _TEXT_COLS:
    __vectorizer = TfidfVectorizer(max_features=100)
    __train_text = __vectorizer.fit_transform(__train_dataset[_col].fillna("").astype(str)).toarray()
    __test_text = __vectorizer.transform(__test_dataset[_col].fillna("").astype(str)).toarray()
    __text_names = [_col + "_tfidf_" + str(_i) for _i in range(__train_text.shape[1])]
    __train_dataset = pd.concat([__train_dataset.drop([_col], axis=1),
                                 pd.DataFrame(__train_text, columns=__text_names, index=__train_dataset.index)], axis=1)
    __test_dataset = pd.concat([__test_dataset.drop([_col], axis=1),
                                pd.DataFrame(__test_text, columns=__text_names, index=__test_dataset.index)], axis=1)
